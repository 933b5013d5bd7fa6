#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "acpo/bounds.hpp"

using namespace acpo;

namespace {

TabularCmdp birth_death(std::uint64_t seed, int states = 4) {
  EnvSpec spec;
  spec.kind = EnvKind::birth_death;
  spec.seed = seed;
  spec.num_states = states;
  spec.num_actions = 2;
  spec.limits = {0.5};
  return construct_cmdp(spec);
}

// Model whose next state is uniform regardless of state and action.
TabularCmdp rank_one_model(int n, int k) {
  TabularCmdp m = fixtures::garnet(3, n, k, 2, 1);
  for (auto& P : m.transition) P.setConstant(1.0 / n);
  return m;
}

}  // namespace

TEST_CASE("identity residual vanishes for identical and random pairs") {
  Rng rng(1);
  const TabularCmdp m = fixtures::garnet(2, 5, 3);
  const Matrix pi = random_policy(5, 3, rng);
  const BoundReport same = check_policy_difference_identity(m, pi, pi);
  CHECK(same.lhs <= 1e-14);
  CHECK(same.holds);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TabularCmdp g = fixtures::garnet(seed, 5, 2 + static_cast<int>(seed % 3), 2);
    const BoundReport r = check_policy_difference_identity(g, random_policy(5, g.num_actions, rng),
                                                           random_policy(5, g.num_actions, rng));
    CHECK(r.lhs < 1e-9);
    CHECK(r.holds);
  }
}

TEST_CASE("identity on the 2-state chain against closed-form algebra") {
  const TabularCmdp m = fixtures::two_state_chain();
  // action-1 probabilities per state for pi and pi'
  const double p0 = 0.2, p1 = 0.7, q0 = 0.9, q1 = 0.1;
  Matrix pi(2, 2), pn(2, 2);
  pi << 1 - p0, p0, 1 - p1, p1;
  pn << 1 - q0, q0, 1 - q1, q1;

  auto gain = [](double a0, double a1) {
    const double up = 0.1 + 0.6 * a0, down = 0.6 - 0.4 * a1;
    return up / (up + down);
  };
  const double J = gain(p0, p1), Jn = gain(q0, q1);
  // bias of pi: reward is 1 on arrival at state 1
  const double up = 0.1 + 0.6 * p0, down = 0.6 - 0.4 * p1;
  const double r0 = up, r1 = 1.0 - down;  // expected one-step reward under pi
  const double gap = (J - r0) / up;       // V(1) - V(0)
  const double V0 = -J * gap, V1 = (1.0 - J) * gap;
  auto q_value = [&](int s, int a) {
    const double e = a;
    const double u = 0.1 + 0.6 * e, dn = 0.6 - 0.4 * e;
    if (s == 0) return u * (1.0 - J + V1) + (1.0 - u) * (0.0 - J + V0);
    return dn * (0.0 - J + V0) + (1.0 - dn) * (1.0 - J + V1);
  };
  const double V[2] = {V0, V1};
  const double dn1 = Jn, dn0 = 1.0 - Jn;
  double expected = 0.0;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) expected += (s == 0 ? dn0 : dn1) * pn(s, a) * (q_value(s, a) - V[s]);
  CHECK(Jn - J == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r1 == doctest::Approx(1.0 - down));

  const BoundReport r = check_policy_difference_identity(m, pi, pn);
  CHECK(r.context_value("gain_difference") == doctest::Approx(Jn - J).epsilon(1e-12));
  CHECK(r.context_value("expected_advantage") == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("non-ergodic operand is an error") {
  TabularCmdp m = fixtures::two_state_chain();
  m.transition[0].setIdentity();
  m.transition[1].setConstant(0.5);
  Matrix stay(2, 2);
  stay << 1, 0, 1, 0;
  CHECK_THROWS_AS(check_policy_difference_identity(m, m.uniform_policy(), stay), std::domain_error);
}

TEST_CASE("surrogate error bound") {
  Rng rng(4);
  const TabularCmdp m = fixtures::garnet(6, 5, 3);
  const Matrix pi = random_policy(5, 3, rng);
  const BoundReport same = check_surrogate_error_bound(m, pi, pi);
  CHECK(same.lhs <= 1e-14);
  CHECK(same.rhs == 0.0);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TabularCmdp g = fixtures::garnet(seed + 500, 6, 3, 3);
    CHECK(check_surrogate_error_bound(g, random_policy(6, 3, rng), random_policy(6, 3, rng)).holds);
  }

  const Matrix mixed = 0.99 * pi + 0.01 * m.uniform_policy();
  const BoundReport near = check_surrogate_error_bound(m, pi, mixed);
  CHECK(near.slack > 0.0);
}

TEST_CASE("stationary TV bound") {
  Rng rng(5);
  const TabularCmdp bd = birth_death(3);
  const Matrix pi = random_policy(4, 2, rng);
  const MixingEstimate mix0 = estimate_mixing_constants(bd, pi, pi, 100, rng);
  const BoundReport same = check_stationary_tv_bound(bd, pi, pi, mix0);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TabularCmdp model = birth_death(seed);
    const Matrix a = random_policy(4, 2, rng), b = random_policy(4, 2, rng);
    const MixingEstimate mix = estimate_mixing_constants(model, a, b, 100, rng);
    CHECK(mix.sigma >= 1.0 / std::sqrt(2.0));
    const BoundReport r = check_stationary_tv_bound(model, a, b, mix);
    CHECK(r.holds);
    CHECK(r.context_value("kemeny_rhs") == doctest::Approx(mix.kemeny * r.rhs / mix.sigma));
  }

  // rank-one chains: d is uniform whatever the policy, sigma = 1
  const TabularCmdp flat = rank_one_model(4, 3);
  const Matrix a = random_policy(4, 3, rng), b = random_policy(4, 3, rng);
  const MixingEstimate mix = estimate_mixing_constants(flat, a, b, 10, rng);
  CHECK(mix.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mix.kemeny == doctest::Approx(4.0).epsilon(1e-12));
  const BoundReport r = check_stationary_tv_bound(flat, a, b, mix);
  CHECK(r.lhs <= 1e-15);
  CHECK(r.rhs == doctest::Approx(expected_policy_tv(Vector::Constant(4, 0.25), b, a)).epsilon(1e-12));
}

TEST_CASE("a failing sigma bound escalates to the Kemeny variant") {
  Rng rng(6);
  const TabularCmdp bd = birth_death(8);
  const Matrix a = random_policy(4, 2, rng), b = random_policy(4, 2, rng);
  MixingEstimate weak{0.0, 1e6};
  const BoundReport r = check_stationary_tv_bound(bd, a, b, weak);
  CHECK(r.holds);
  CHECK(r.context_value("escalated") == 1.0);
  const BoundReport broken = check_stationary_tv_bound(bd, a, b, MixingEstimate{0.0, 0.0});
  CHECK_FALSE(broken.holds);
}

TEST_CASE("improvement sandwich bounds") {
  Rng rng(7);
  const TabularCmdp bd = birth_death(1);
  const Matrix pi = random_policy(4, 2, rng);
  const ImprovementBounds same = improvement_bounds(bd, pi, pi, 3.0);
  CHECK(std::abs(same.lower) <= 1e-14);
  CHECK(std::abs(same.upper) <= 1e-14);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TabularCmdp model = birth_death(seed + 100);
    const Matrix a = random_policy(4, 2, rng), b = random_policy(4, 2, rng);
    const MixingEstimate mix = estimate_mixing_constants(model, a, b, 100, rng);
    const ImprovementBounds ib = improvement_bounds(model, a, b, mix.sigma);
    const double diff = gain_bias_advantage(model, b).reward.gain - gain_bias_advantage(model, a).reward.gain;
    CHECK(ib.lower <= diff + 1e-9);
    CHECK(diff <= ib.upper + 1e-9);
    for (const BoundReport& rep : ib.reports) CHECK_MESSAGE(rep.holds, rep.name);
    // KL-relaxed rhs is never tighter
    auto find = [&](const std::string& name) {
      for (const BoundReport& rep : ib.reports)
        if (rep.name == name) return rep;
      FAIL("missing report " << name);
      return BoundReport{};
    };
    CHECK(find("reward_improvement_upper_kl").rhs >= find("reward_improvement_upper").rhs - 1e-15);
    CHECK(find("cost1_change_lower_kl").lhs <= find("cost1_change_lower").lhs + 1e-15);
  }
}

TEST_CASE("trust-region guarantees for a stationary feasible update") {
  Rng rng(9);
  const TabularCmdp m = fixtures::two_state_chain();
  Matrix pi(2, 2);
  pi << 0.9, 0.1, 0.9, 0.1;
  const auto reports = trust_region_guarantees(m, pi, pi, 1e-3, m.limits);
  REQUIRE(reports.size() == 4);
  for (const BoundReport& r : reports) {
    CHECK(r.holds);
    CHECK(r.context_value("vmax") == 0.0);
    CHECK(r.context_value("hypotheses") == 1.0);
    CHECK(r.context_value("kl") == 0.0);
  }
}

TEST_CASE("infeasible start: scaled V_max dominates when alpha >= 1") {
  const TabularCmdp m = fixtures::two_state_chain();
  Matrix pi(2, 2);
  pi << 0.05, 0.95, 0.05, 0.95;  // cost about 0.95, above the 0.6 limit
  Matrix next = pi;
  next.col(0).array() += 0.01;
  next.col(1).array() -= 0.01;
  const auto reports = trust_region_guarantees(m, pi, next, 1e-4, m.limits);
  const double beta = gain_bias_advantage(m, pi).costs[0].gain - m.limits(0);
  REQUIRE(beta > 0.0);
  double squared = 0.0, scaled = 0.0;
  for (const BoundReport& r : reports) {
    if (r.name == "trust_region_reward_degradation_vmax_squared") squared = r.context_value("vmax");
    if (r.name == "trust_region_reward_degradation_vmax_scaled") scaled = r.context_value("vmax");
  }
  CHECK(squared == doctest::Approx(beta * beta).epsilon(1e-12));
  const double alpha = scaled / (beta * beta);
  if (alpha >= 1.0) CHECK(scaled >= squared);
  // a 0.01 shift cannot meet the exact linearized constraint from this far out
  for (const BoundReport& r : reports) CHECK(r.context_value("hypotheses") == 0.0);
}

TEST_CASE("softmax Fisher quadratic matches a dense pseudo-inverse") {
  Rng rng(10);
  const int S = 3, A = 3;
  const Matrix pi = random_policy(S, A, rng);
  Vector d(S);
  d << 0.5, 0.3, 0.2;
  Matrix grad(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) grad(s, a) = standard_normal(rng);
  Matrix F = Matrix::Zero(S * A, S * A);
  Vector g(S * A);
  for (int s = 0; s < S; ++s) {
    const Vector p = pi.row(s).transpose();
    F.block(s * A, s * A, A, A) = d(s) * (Matrix(p.asDiagonal()) - p * p.transpose());
    g.segment(s * A, A) = grad.row(s).transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector inv = svd.singularValues();
  for (Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 1e-12 ? 1.0 / inv(i) : 0.0;
  const Matrix pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  CHECK(softmax_fisher_quadratic(d, pi, grad) == doctest::Approx(g.dot(pinv * g)).epsilon(1e-9));
}

TEST_CASE("discounted penalty grows like gamma / (1 - gamma)") {
  Rng rng(11);
  const TabularCmdp m = fixtures::garnet(12, 5, 3);
  const Matrix a = random_policy(5, 3, rng), b = random_policy(5, 3, rng);
  const auto pts = trivialization_demo(m, a, b, {0.9, 0.99, 0.999});
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].penalty > pts[0].penalty);
  CHECK(pts[2].penalty > pts[1].penalty);
  for (const auto& p : pts) CHECK(p.penalty == doctest::Approx(2.0 * p.scale * p.epsilon * p.expected_tv));
  CHECK(pts[2].scale / pts[1].scale == doctest::Approx(999.0 / 99.0).epsilon(1e-12));
  CHECK(pts[2].penalty / pts[1].penalty > 5.0);

  for (const auto& p : trivialization_demo(m, a, a, {0.9, 0.99, 0.999})) CHECK(p.penalty == 0.0);
  CHECK_THROWS_AS(trivialization_demo(m, a, b, {0.9, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(trivialization_demo(m, a, b, {0.99, 0.9}), std::invalid_argument);
}
