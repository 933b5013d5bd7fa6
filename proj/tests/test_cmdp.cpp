#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "acpo/exact.hpp"

using namespace acpo;

TEST_CASE("garnet rows are distributions with the requested branching") {
  const TabularCmdp m = fixtures::garnet(7, 5, 3, 2, 1);
  CHECK(m.num_states == 5);
  CHECK(m.num_actions == 3);
  for (int a = 0; a < 3; ++a) {
    const Matrix& P = m.transition[static_cast<std::size_t>(a)];
    for (int s = 0; s < 5; ++s) {
      CHECK(std::abs(P.row(s).sum() - 1.0) <= 1e-12);
      CHECK((P.row(s).array() > 0.0).count() <= 2);
    }
  }
  CHECK(is_primitive(m.induced_transition(m.uniform_policy())));
  for (const auto& c : m.costs[0]) CHECK((c.array() >= 0.0).all());
}

TEST_CASE("construction is deterministic") {
  std::ostringstream a, b;
  write_cmdp(a, fixtures::garnet(11, 6, 2, 3, 2));
  write_cmdp(b, fixtures::garnet(11, 6, 2, 3, 2));
  CHECK(a.str() == b.str());
  std::ostringstream c;
  write_cmdp(c, fixtures::garnet(12, 6, 2, 3, 2));
  CHECK(a.str() != c.str());
}

TEST_CASE("two-state chain matches the hand-built tensors") {
  const TabularCmdp m = fixtures::two_state_chain();
  // effort 0: up 0.1, down 0.6; effort 1: up 0.7, down 0.2; walls fold into staying
  Matrix p0(2, 2), p1(2, 2);
  p0 << 0.9, 0.1, 0.6, 0.4;
  p1 << 0.3, 0.7, 0.2, 0.8;
  CHECK(m.transition[0].isApprox(p0, 1e-15));
  CHECK(m.transition[1].isApprox(p1, 1e-15));
  CHECK(m.reward[1](1, 0) == 1.0);
  CHECK(m.reward[0](0, 1) == 0.0);
  CHECK(m.costs[0][1](0, 0) == 1.0);
  CHECK(m.costs[0][0](1, 1) == 0.0);
  // uniform policy: symmetric 0.4 switching, d = (1/2, 1/2), J = 1/2
  const ExactEvaluation ev = gain_bias_advantage(m, m.uniform_policy());
  CHECK(ev.reward.gain == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ev.costs[0].gain == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("chain constraint binds and non-binding limits are rejected") {
  EnvSpec spec;
  spec.kind = EnvKind::chain;
  spec.limits = {0.5};
  CHECK_NOTHROW(construct_cmdp(spec));
  spec.limits = {1.5};
  CHECK_THROWS_AS(construct_cmdp(spec), std::invalid_argument);
  spec.limits = {std::numeric_limits<double>::infinity()};
  CHECK_NOTHROW(construct_cmdp(spec));
}

TEST_CASE("invalid specs and models are rejected") {
  EnvSpec spec;
  spec.kind = EnvKind::garnet;
  spec.num_states = 1;
  CHECK_THROWS_AS(construct_cmdp(spec), std::invalid_argument);
  spec.num_states = 4;
  spec.branching = 5;
  CHECK_THROWS_AS(construct_cmdp(spec), std::invalid_argument);

  TabularCmdp m = fixtures::two_state_chain();
  m.transition[0](0, 0) = 0.95;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);

  // absorbing states make the uniform chain reducible
  Matrix P = Matrix::Identity(2, 2);
  TabularCmdp reducible = fixtures::markov_chain(P, Vector::Zero(2));
  CHECK_THROWS_AS(reducible.validate(), std::invalid_argument);
  // periodic flip
  P << 0, 1, 1, 0;
  CHECK_FALSE(is_primitive(P));
}

TEST_CASE("tensor text format round-trips exactly") {
  const TabularCmdp m = fixtures::garnet(3, 4, 3, 2, 2);
  std::stringstream buf;
  write_cmdp(buf, m);
  std::string header;
  std::getline(buf, header);
  CHECK(header == "4 3 2");
  buf.seekg(0);
  const TabularCmdp back = read_cmdp(buf);
  for (int a = 0; a < 3; ++a) {
    CHECK(back.transition[static_cast<std::size_t>(a)] == m.transition[static_cast<std::size_t>(a)]);
    CHECK(back.reward[static_cast<std::size_t>(a)] == m.reward[static_cast<std::size_t>(a)]);
    for (int i = 0; i < 2; ++i)
      CHECK(back.costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] ==
            m.costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]);
  }
  CHECK(back.limits == m.limits);
  CHECK(back.initial_dist == m.initial_dist);

  std::stringstream truncated("2 2 0\n0.5 0.5\n");
  CHECK_THROWS(read_cmdp(truncated));
}

TEST_CASE("step follows degenerate rows and rejects bad indices") {
  TabularCmdp m = fixtures::two_state_chain();
  m.transition[0] << 0, 1, 1, 0;
  m.reward[0].setOnes();
  Rng rng(5);
  int s = 0;
  for (int t = 0; t < 20; ++t) {
    const TabularStep st = step(m, s, 0, rng);
    CHECK(st.next_state == 1 - s);
    CHECK(st.reward == 1.0);
    s = st.next_state;
  }
  CHECK_THROWS_AS(step(m, 0, 2, rng), std::out_of_range);
  CHECK_THROWS_AS(step(m, 2, 0, rng), std::out_of_range);
  CHECK_THROWS_AS(step(m, 0, -1, rng), std::out_of_range);
}

TEST_CASE("next-state frequencies lie within 3 sigma of P") {
  const TabularCmdp m = fixtures::garnet(21, 3, 2, 3, 1);
  Rng rng(99);
  const int draws = 100000;
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) {
      Vector counts = Vector::Zero(3);
      for (int k = 0; k < draws; ++k) counts(step(m, s, a, rng).next_state) += 1.0;
      for (int sp = 0; sp < 3; ++sp) {
        const double p = m.transition[static_cast<std::size_t>(a)](s, sp);
        const double sd = std::sqrt(draws * p * (1.0 - p));
        CHECK(std::abs(counts(sp) - draws * p) <= 3.0 * sd + 1e-9);
      }
    }
}

TEST_CASE("long-run visit frequencies approach the stationary distribution") {
  const TabularCmdp m = fixtures::two_state_chain();
  Matrix pi(2, 2);
  pi << 0.3, 0.7, 0.8, 0.2;
  const Vector d = policy_chain(m, pi).stationary;
  TabularEnv env(m);
  Rng rng(17);
  Vector s = env.initial_state(rng);
  Vector visits = Vector::Zero(2);
  for (int t = 0; t < 100000; ++t) {
    visits(static_cast<Index>(s(0))) += 1.0;
    const Vector a = Vector::Constant(1, static_cast<double>(sample_categorical(pi.row(static_cast<Index>(s(0))), rng)));
    s = env.step(s, a, rng).next_state;
  }
  visits /= 100000.0;
  CHECK((visits - d).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("gridworld costs flag hazard entries and the goal teleports home") {
  EnvSpec spec;
  spec.kind = EnvKind::gridworld;
  spec.num_states = 9;
  spec.num_actions = 4;
  const TabularCmdp m = construct_cmdp(spec);
  for (int a = 0; a < 4; ++a) {
    CHECK(m.transition[static_cast<std::size_t>(a)](8, 0) == 1.0);
    CHECK(m.reward[static_cast<std::size_t>(a)](8, 0) == 1.0);
    CHECK(m.costs[0][static_cast<std::size_t>(a)](1, 4) == 1.0);  // center is the hazard
    CHECK(m.costs[0][static_cast<std::size_t>(a)](0, 1) == 0.0);
  }
  spec.num_states = 10;
  CHECK_THROWS_AS(construct_cmdp(spec), std::invalid_argument);
}

TEST_CASE("point-circle dynamics, reward and cost") {
  EnvSpec spec;
  spec.kind = EnvKind::point_circle;
  spec.limits = {0.1};
  const PointCircleEnv env = construct_point_circle(spec);
  Rng rng(1);
  const Vector origin = env.initial_state(rng);
  CHECK(origin == Vector::Zero(4));
  spec.action_noise = 0.0;
  const PointCircleEnv quiet(spec);
  const Transition t = quiet.step(origin, Vector::Zero(2), rng);
  CHECK(t.reward == 0.0);
  CHECK(t.costs(0) == 0.0);
  CHECK(t.next_state == Vector::Zero(4));

  Vector s(4);
  s << 0.6, 0.0, 0.0, 0.0;
  CHECK(env.cost(s) == 1.0);
  s(0) = -0.6;
  CHECK(env.cost(s) == 1.0);
  s(0) = 0.5;
  CHECK(env.cost(s) == 0.0);
  // on the unit circle moving counter-clockwise at unit speed
  s << 1.0, 0.0, 0.0, 1.0;
  CHECK(env.reward(s) == doctest::Approx(1.0));
  s << 0.0, 2.0, -1.0, 0.0;  // radius 2, |2 - 1| = 1
  CHECK(env.reward(s) == doctest::Approx(1.0));

  // clipped action, explicit Euler with drag
  Vector x(4);
  x << 0.1, 0.2, 0.3, -0.4;
  Vector a(2);
  a << 5.0, -5.0;
  const Transition u = quiet.step(x, a, rng);
  CHECK(u.next_state(0) == doctest::Approx(0.1 + 0.05 * 0.3));
  CHECK(u.next_state(1) == doctest::Approx(0.2 - 0.05 * 0.4));
  CHECK(u.next_state(2) == doctest::Approx((1 - 0.5 * 0.05) * 0.3 + 0.05));
  CHECK(u.next_state(3) == doctest::Approx((1 - 0.5 * 0.05) * -0.4 - 0.05));
}

TEST_CASE("point-circle trajectories replay under a fixed seed") {
  EnvSpec spec;
  spec.kind = EnvKind::point_circle;
  const auto env = make_environment(spec);
  auto roll = [&](std::uint64_t seed) {
    Rng rng(seed);
    Vector s = env->initial_state(rng);
    Matrix path(100, 4);
    Vector a(2);
    a << 0.3, 0.7;
    for (int t = 0; t < 100; ++t) {
      s = env->step(s, a, rng).next_state;
      path.row(t) = s.transpose();
    }
    return path;
  };
  CHECK(roll(4) == roll(4));
  CHECK(roll(4) != roll(5));
}
