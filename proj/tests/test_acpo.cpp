#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "acpo/acpo.hpp"
#include "acpo/exact.hpp"

using namespace acpo;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vector randn(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
  return v;
}

Matrix random_spd(Index d, Rng& rng) {
  Matrix R(d, d);
  for (Index i = 0; i < d; ++i) R.col(i) = randn(d, rng);
  return R * R.transpose() + 0.5 * Matrix::Identity(d, d);
}

TrustRegionProblem identity_problem(const Vector& g, const Matrix& A, const Vector& c, double delta) {
  return make_problem(g, A, c, LinearOperator<double>::from_matrix(Matrix::Identity(g.size(), g.size())), delta, 50);
}

// max g^T x s.t. c + a^T x <= 0, 1/2 x^T H x <= delta, by whitening: y = L^T x with H = L L^T.
Vector geometric_optimum(const Matrix& H, const Vector& g, const Vector& a, double c, double delta) {
  const Eigen::LLT<Matrix> llt(H);
  const Matrix L = llt.matrixL();
  const Vector gt = L.triangularView<Eigen::Lower>().solve(g);
  const Vector at = L.triangularView<Eigen::Lower>().solve(a);
  const double radius = std::sqrt(2.0 * delta);
  Vector y = radius * gt.normalized();
  if (c + at.dot(y) > 0.0) {
    const Vector ahat = at.normalized();
    const double offset = -c / at.norm();
    const Vector gperp = (gt - gt.dot(ahat) * ahat).normalized();
    y = offset * ahat + std::sqrt(radius * radius - offset * offset) * gperp;
  }
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

}  // namespace

TEST_CASE("unconstrained steps") {
  const TrustRegionProblem p = identity_problem(vec({1.0, 0.0}), Matrix(2, 0), Vector(0), 0.5);
  const DualSolution d = solve_dual(p);
  CHECK(d.kind == DualCase::interior);
  CHECK(d.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((primal_step(p, d) - vec({1.0, 0.0})).norm() <= 1e-12);

  const TrustRegionProblem q = identity_problem(vec({3.0, 4.0}), Matrix(2, 0), Vector(0), 0.5);
  const DualSolution dq = solve_dual(q);
  CHECK(dq.lambda == doctest::Approx(5.0).epsilon(1e-12));
  CHECK((primal_step(q, dq) - vec({0.6, 0.8})).norm() <= 1e-12);
  CHECK(dq.objective == doctest::Approx(5.0).epsilon(1e-12));  // g^T x = 0.6*3 + 0.8*4

  // general H: the natural-gradient step lands on the trust boundary
  Rng rng(1);
  const Matrix H = random_spd(5, rng);
  const Vector g = randn(5, rng);
  const TrustRegionProblem r = make_problem(g, Matrix(5, 0), Vector(0), LinearOperator<double>::from_matrix(H), 1e-3, 10);
  const Vector step = primal_step(r, solve_dual(r));
  CHECK(step.dot(H * step) == doctest::Approx(2e-3).epsilon(1e-8));
  const Vector natural = H.ldlt().solve(g);
  CHECK((step - std::sqrt(2e-3 / g.dot(natural)) * natural).norm() <= 1e-8 * step.norm());
}

TEST_CASE("zero gradient with a satisfied constraint stays put") {
  Matrix A(2, 1);
  A << 1.0, 1.0;
  const TrustRegionProblem p = identity_problem(Vector::Zero(2), A, vec({-0.5}), 0.1);
  const DualSolution d = solve_dual(p);
  CHECK(d.mu(0) == 0.0);
  CHECK(primal_step(p, d) == Vector::Zero(2));
}

TEST_CASE("feasibility test") {
  Matrix A(2, 1);
  A << 1.0, 0.0;  // a^T H^{-1} a = 1
  CHECK(classify_feasibility(identity_problem(vec({1.0, 1.0}), A, vec({1.0}), 0.1)) == Feasibility::infeasible);
  CHECK(classify_feasibility(identity_problem(vec({1.0, 1.0}), A, vec({0.1}), 0.1)) == Feasibility::feasible);
  CHECK(classify_feasibility(identity_problem(vec({1.0, 1.0}), A, vec({-3.0}), 0.1)) == Feasibility::feasible);
  CHECK(minimum_constraint_energy(identity_problem(vec({1.0, 1.0}), A, vec({1.0}), 0.1)) == doctest::Approx(0.5));
  const TrustRegionProblem none = identity_problem(vec({1.0, 1.0}), Matrix(2, 0), Vector(0), 0.1);
  CHECK(classify_feasibility(none) == Feasibility::feasible);
  const TrustRegionProblem degenerate = identity_problem(vec({1.0, 1.0}), Matrix::Zero(2, 1), vec({0.5}), 0.1);
  CHECK_THROWS_AS(classify_feasibility(degenerate), std::domain_error);
  const DualSolution inf = solve_dual(identity_problem(vec({1.0, 1.0}), A, vec({1.0}), 0.1));
  CHECK(inf.kind == DualCase::infeasible_detected);
}

TEST_CASE("single-constraint dual against geometry and a multiplier grid") {
  Rng rng(2);
  int active_cases = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix H = random_spd(3, rng);
    const Vector g = randn(3, rng);
    const Vector a = randn(3, rng);
    const double delta = 0.05;
    const double c = 0.2 * standard_normal(rng);
    Matrix A(3, 1);
    A.col(0) = a;
    const TrustRegionProblem p =
        make_problem(g, A, vec({c}), LinearOperator<double>::from_matrix(H), delta, 10);
    if (classify_feasibility(p) == Feasibility::infeasible) continue;
    const DualSolution d = solve_dual(p);
    if (d.kind == DualCase::constraint_active) ++active_cases;
    const Vector x = primal_step(p, d);
    const Vector oracle = geometric_optimum(H, g, a, c, delta);
    CHECK((x - oracle).norm() <= 1e-6 * (1.0 + oracle.norm()));
    // constraints, complementary slackness, strong duality
    CHECK(c + a.dot(x) <= 1e-6);
    CHECK(0.5 * x.dot(H * x) <= delta * (1.0 + 1e-6));
    CHECK(std::abs(d.mu(0) * (c + a.dot(x))) <= 1e-6);
    CHECK(d.objective == doctest::Approx(g.dot(x)).epsilon(1e-6));
    CHECK(d.lambda >= 0.0);
    CHECK(d.mu(0) >= 0.0);

    // 200 x 200 grid over (lambda, mu)
    const double lam_hi = 3.0 * d.lambda + 1.0, mu_hi = 3.0 * d.mu(0) + 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i)
      for (int j = 0; j < 200; ++j)
        best = std::min(best, dual_objective(p, lam_hi * i / 200.0, vec({mu_hi * j / 199.0})));
    CHECK(best >= d.objective - 1e-9);
    CHECK(best - d.objective <= 1e-3 * std::max(1.0, std::abs(d.objective)));
  }
  CHECK(active_cases > 0);
}

TEST_CASE("transcribed dual differs by half the trust-region term") {
  Matrix A(2, 1);
  A << 0.3, -1.0;
  const TrustRegionProblem p = identity_problem(vec({1.0, 2.0}), A, vec({0.1}), 0.2);
  const DualSolution d = solve_dual(p);
  CHECK(dual_objective(p, d.lambda, d.mu) - transcribed_dual_objective(p, d.lambda, d.mu) ==
        doctest::Approx(0.5 * d.lambda * 0.2));
}

TEST_CASE("multi-constraint dual satisfies KKT and beats sampled feasible points") {
  Rng rng(3);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Index dim = 4;
    const int m = 2 + trial % 2;
    const Matrix H = random_spd(dim, rng);
    const Vector g = randn(dim, rng);
    Matrix A(dim, m);
    for (int i = 0; i < m; ++i) A.col(i) = randn(dim, rng);
    const Vector c = 0.1 * randn(m, rng);
    const double delta = 0.05;
    const TrustRegionProblem p = make_problem(g, A, c, LinearOperator<double>::from_matrix(H), delta, 20);
    if (classify_feasibility(p) == Feasibility::infeasible) continue;
    ++checked;
    const DualSolution d = solve_dual(p);
    const Vector x = primal_step(p, d);
    const Vector lin = c + A.transpose() * x;
    CHECK(lin.maxCoeff() <= 1e-6);
    CHECK(0.5 * x.dot(H * x) <= delta * (1.0 + 1e-6));
    CHECK((d.mu.array() >= 0.0).all());
    CHECK(std::abs(d.mu.dot(lin)) <= 1e-6);
    if (d.lambda > 0.0) {
      CHECK((g - A * d.mu - d.lambda * H * x).norm() <= 1e-6 * (1.0 + g.norm()));
      CHECK(d.objective == doctest::Approx(g.dot(x)).epsilon(1e-6));
    }
    const Eigen::LLT<Matrix> llt(H);
    for (int k = 0; k < 2000; ++k) {
      Vector y = randn(dim, rng);
      y *= std::sqrt(2.0 * delta) * std::pow(uniform01(rng), 0.25) / y.norm();
      const Vector z = llt.matrixU().solve(y);
      if ((c + A.transpose() * z).maxCoeff() <= 0.0) CHECK(g.dot(z) <= g.dot(x) + 1e-9);
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("primal step edge cases") {
  Matrix A(2, 1);
  A << 1.0, 2.0;
  const TrustRegionProblem p = identity_problem(vec({0.5, 1.0}), A, vec({-1.0}), 0.1);
  DualSolution d;
  d.lambda = 1.0;
  d.mu = vec({0.5});
  d.active = {true};
  CHECK(primal_step(p, d).norm() <= 1e-14);
  d.kind = DualCase::infeasible_detected;
  CHECK_THROWS_AS(primal_step(p, d), std::invalid_argument);
}

TEST_CASE("recovery steps") {
  Matrix A(2, 1);
  A << 3.0, 4.0;
  const TrustRegionProblem p = identity_problem(vec({1.0, -2.0}), A, vec({5.0}), 0.5);
  CHECK((recovery_step(p, 1.0) + vec({0.6, 0.8})).norm() <= 1e-12);
  const Vector pure_g = recovery_step(p, 0.0);
  CHECK((pure_g + vec({1.0, -2.0}) / std::sqrt(5.0)).norm() <= 1e-12);
  const Vector mixed = recovery_step(p, 0.75);
  CHECK((mixed - (0.75 * recovery_step(p, 1.0) + 0.25 * pure_g)).norm() <= 1e-12);
  CHECK_THROWS_AS(recovery_step(p, 1.5), std::invalid_argument);

  Rng rng(4);
  const Matrix H = random_spd(6, rng);
  Matrix B(6, 1);
  B.col(0) = randn(6, rng);
  const TrustRegionProblem q = make_problem(randn(6, rng), B, vec({1.0}), LinearOperator<double>::from_matrix(H), 1e-4, 20);
  const Vector step = recovery_step(q, 1.0);
  const Vector hinv_a = H.ldlt().solve(B.col(0));
  CHECK(step.dot(hinv_a) / (step.norm() * hinv_a.norm()) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(0.5 * step.dot(H * step) == doctest::Approx(1e-4).epsilon(1e-8));

  // zero-norm terms fall back to the other one
  const TrustRegionProblem zero_g = identity_problem(Vector::Zero(2), A, vec({5.0}), 0.5);
  CHECK((recovery_step(zero_g, 0.5) + vec({0.6, 0.8})).norm() <= 1e-12);
  const TrustRegionProblem zero_a = identity_problem(vec({1.0, 0.0}), Matrix::Zero(2, 1), vec({5.0}), 0.5);
  CHECK((recovery_step(zero_a, 0.75) + vec({1.0, 0.0})).norm() <= 1e-12);
}

TEST_CASE("backtracking line search") {
  const double delta = 1e-2;
  const TrustRegionProblem p = identity_problem(vec({1.0, 0.0}), Matrix(2, 0), Vector(0), delta);
  const Vector theta = vec({0.3, -0.1});
  const Vector step = vec({1.0, 1.0});
  auto quadratic = [&](double k0) {
    return KlMeasure([=](const Vector& x) { return (x - theta).squaredNorm() / step.squaredNorm() * k0; });
  };
  const LineSearchResult zero = line_search(theta, Vector::Zero(2), p, quadratic(1.0), 0.75, 10);
  CHECK(zero.accepted);
  CHECK(zero.exponent == 0);
  CHECK(zero.kl == 0.0);

  // s^(2j) K0 <= delta
  CHECK(line_search(theta, step, p, quadratic(2.0 * delta), 0.75, 10).exponent == 2);
  CHECK(line_search(theta, step, p, quadratic(4.0 * delta), 0.75, 10).exponent == 3);
  for (double k0 : {2.0, 4.0, 9.0, 100.0}) {
    const int j = line_search(theta, step, p, quadratic(k0 * delta), 0.75, 40).exponent;
    CHECK(j == static_cast<int>(std::ceil(std::log(1.0 / k0) / std::log(0.75 * 0.75))));
  }
  const LineSearchResult huge = line_search(theta, step, p, quadratic(1e12), 0.75, 10);
  CHECK_FALSE(huge.accepted);
  CHECK(huge.params == theta);
  const LineSearchResult rescued = line_search(theta, step, p, quadratic(1e3 * delta), 0.75, 30);
  CHECK(rescued.accepted);
  CHECK(rescued.exponent > 0);
  CHECK(rescued.kl <= delta);
  CHECK_THROWS_AS(line_search(theta, step, p, quadratic(1.0), 1.0, 10), std::invalid_argument);
}

TEST_CASE("line search respects the linearized constraints") {
  Matrix A(2, 1);
  A << 1.0, 0.0;
  const Vector theta = Vector::Zero(2);
  const KlMeasure none = [](const Vector&) { return 0.0; };
  // feasible start: c + s^j a^T dx must reach <= 0
  const TrustRegionProblem p = identity_problem(vec({1.0, 0.0}), A, vec({-0.5}), 1.0);
  const LineSearchResult r = line_search(theta, vec({1.0, 0.0}), p, none, 0.5, 10);
  CHECK(r.exponent == 1);
  CHECK(r.linearized(0) == doctest::Approx(0.0));
  // violated start: any step that moves toward feasibility is accepted
  const TrustRegionProblem v = identity_problem(vec({1.0, 0.0}), A, vec({0.5}), 1.0);
  CHECK(line_search(theta, vec({-0.1, 0.0}), v, none, 0.5, 10).exponent == 0);
  CHECK_FALSE(line_search(theta, vec({0.1, 0.0}), v, none, 0.5, 10).accepted);
  // positive slack admits small overshoot
  CHECK(line_search(theta, vec({0.6, 0.0}), p, none, 0.5, 10, 0.2).exponent == 0);
}

TEST_CASE("weighted surrogate gradient equals the exact policy gradient") {
  const TabularCmdp m = fixtures::two_state_chain();
  TabularSoftmaxPolicy pi(2, 2);
  pi.set_params(vec({0.2, -0.3, 0.5, 0.1}));
  const ExactEvaluation ev = gain_bias_advantage(m, pi.policy_matrix());
  Matrix states(4, 1), actions(4, 1);
  Vector adv(4), w(4);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      const int k = 2 * s + a;
      states(k, 0) = s;
      actions(k, 0) = a;
      adv(k) = ev.reward.advantage(s, a);
      w(k) = ev.chain.stationary(s) * pi.policy_matrix()(s, a);
    }
  const Vector g = surrogate_gradient(pi, states, actions, adv, w);
  const double h = 1e-6;
  for (Index i = 0; i < 4; ++i) {
    TabularSoftmaxPolicy up = pi, down = pi;
    up.set_params(pi.params() + h * Vector::Unit(4, i));
    down.set_params(pi.params() - h * Vector::Unit(4, i));
    const double fd = (gain_bias_advantage(m, up.policy_matrix()).reward.gain -
                       gain_bias_advantage(m, down.policy_matrix()).reward.gain) / (2.0 * h);
    CHECK(std::abs(g(i) - fd) <= 1e-6);
  }
}

TEST_CASE("local problem assembly") {
  const TabularEnv env(fixtures::garnet(4, 4, 3, 2, 2));
  const TabularSoftmaxPolicy pi(4, 3);
  const RolloutBatch b = collect_batch(env, pi, Vector::Zero(1), 200, 3);
  AdvantageEstimates adv;
  adv.reward = Vector::Zero(200);
  adv.costs = Matrix::Zero(200, 2);
  UpdateSettings settings;
  const Vector gains = estimate_gains(b).costs;
  const TrustRegionProblem p = build_local_problem(b, pi, adv, gains, vec({0.4, 0.5}), settings);
  CHECK(p.g == Vector::Zero(12));
  CHECK(p.A == Matrix::Zero(12, 2));
  CHECK(p.c(0) == doctest::Approx(gains(0) - 0.4));
  CHECK(p.delta == settings.delta);

  const double inf = std::numeric_limits<double>::infinity();
  const TrustRegionProblem one = build_local_problem(b, pi, adv, gains, vec({inf, 0.5}), settings);
  CHECK(one.num_constraints() == 1);
  CHECK(one.constraint_index == std::vector<int>{1});
  const TrustRegionProblem none = build_local_problem(b, pi, adv, gains, vec({inf, inf}), settings);
  CHECK(none.num_constraints() == 0);
  CHECK(none.c.size() == 0);
  CHECK_THROWS_AS(build_local_problem(b, pi, adv, gains, vec({0.5}), settings), std::invalid_argument);

  Rng rng(5);
  CHECK(symmetry_probe(p.H, rng) <= 1e-12);
}

TEST_CASE("an infinite limit gives the unconstrained update") {
  EnvSpec spec;
  spec.limits = {std::numeric_limits<double>::infinity()};
  const auto env = make_environment(spec);
  Rng rng(6);
  AgentState agent = make_agent(*env, std::make_unique<TabularSoftmaxPolicy>(10, 2), CriticFlavor::tabular, rng);
  UpdateSettings settings;
  settings.batch_size = 500;
  const IterationReport r = acpo_iteration(*env, agent, settings, 7);
  CHECK(r.error.empty());
  CHECK(r.kind == StepKind::dual_step);
  CHECK(r.dual_case == "interior");
  CHECK(r.mu.size() == 0);
  CHECK(r.kl <= settings.delta);
}

TEST_CASE("a violating start triggers recovery and errors leave the agent unchanged") {
  EnvSpec spec;
  const auto env = make_environment(spec);
  Rng rng(7);
  Vector logits = Vector::Zero(20);
  for (int s = 0; s < 10; ++s) logits(2 * s + 1) = 4.0;  // nearly always full effort
  auto policy = std::make_unique<TabularSoftmaxPolicy>(TabularSoftmaxPolicy::from_logits(10, 2, logits));
  const double start_cost = gain_bias_advantage(*env->model(), policy->policy_matrix()).costs[0].gain;
  REQUIRE(start_cost > spec.limits[0]);
  AgentState agent = make_agent(*env, std::move(policy), CriticFlavor::tabular, rng);
  UpdateSettings settings;
  settings.batch_size = 1000;
  settings.fresh_kl_states = 1000;
  const IterationReport r = acpo_iteration(*env, agent, settings, 11);
  CHECK(r.error.empty());
  CHECK(r.kind == StepKind::recovery);
  CHECK(r.dual_case == "infeasible-detected");
  CHECK(r.kl <= settings.delta);
  CHECK(r.fresh_kl >= 0.0);
  CHECK(r.fresh_kl <= 1.5 * settings.delta);
  const double after = gain_bias_advantage(*env->model(),
                                           dynamic_cast<const TabularSoftmaxPolicy&>(*agent.policy).policy_matrix())
                           .costs[0]
                           .gain;
  CHECK(after < start_cost);

  const Vector before = agent.policy->params();
  const Vector state = agent.state;
  UpdateSettings broken = settings;
  broken.batch_size = 1;
  const IterationReport bad = acpo_iteration(*env, agent, broken, 12);
  CHECK_FALSE(bad.error.empty());
  CHECK(bad.kind == StepKind::no_update);
  CHECK(agent.policy->params() == before);
  CHECK(agent.state == state);
}

TEST_CASE("names round-trip") {
  for (Algorithm a : {Algorithm::acpo, Algorithm::atrpo, Algorithm::atrpo_lagrangian, Algorithm::cpo_gamma})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS(parse_algorithm("ppo"));
  CHECK(to_string(StepKind::recovery) == "recovery");
}
