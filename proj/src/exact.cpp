#include "acpo/exact.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "acpo/linalg.hpp"
#include "acpo/simplex.hpp"

namespace acpo {

void require_policy(const TabularCmdp& cmdp, const Matrix& policy) {
  if (policy.rows() != cmdp.num_states || policy.cols() != cmdp.num_actions)
    throw std::invalid_argument("policy shape must be |S| x |A|");
  if ((policy.array() < -1e-12).any() || ((policy.rowwise().sum().array() - 1.0).abs() > 1e-9).any())
    throw std::invalid_argument("policy rows must be probability distributions");
}

Matrix random_policy(int num_states, int num_actions, Rng& rng) {
  Matrix pi(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) pi.row(s) = sample_flat_dirichlet(num_actions, rng).transpose();
  return pi;
}

ChainAnalysis analyze_chain(const Matrix& P) {
  const Index n = P.rows();
  ChainAnalysis out;
  out.transition = P;
  out.stationary = stationary_distribution(P);
  if ((out.stationary.array() < -1e-10).any()) throw std::domain_error("stationary solve produced negative mass");

  Eigen::EigenSolver<Matrix> eig(P, false);
  out.eigenvalues = eig.eigenvalues();
  Index unit = 0;
  for (Index i = 1; i < n; ++i)
    if (std::abs(out.eigenvalues(i) - 1.0) < std::abs(out.eigenvalues(unit) - 1.0)) unit = i;
  out.sigma = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (i == unit) continue;
    const double gap = std::abs(1.0 - out.eigenvalues(i));
    if (gap < 1e-9) throw std::domain_error("chain has a repeated unit eigenvalue: not ergodic");
    out.sigma = std::max(out.sigma, 1.0 / std::sqrt(gap));
  }
  const Matrix fundamental_inv = Matrix::Identity(n, n) - P + Vector::Ones(n) * out.stationary.transpose();
  out.fundamental = fundamental_inv.fullPivLu().inverse();
  out.kemeny = out.fundamental.trace();
  return out;
}

ChainAnalysis policy_chain(const TabularCmdp& cmdp, const Matrix& policy) {
  require_policy(cmdp, policy);
  return analyze_chain(cmdp.induced_transition(policy));
}

SignalEvaluation evaluate_signal(const TabularCmdp& cmdp, const Matrix& policy, const ChainAnalysis& chain,
                                 const std::vector<Matrix>& signal) {
  const Matrix expected = cmdp.expected(signal);
  const Vector per_state = expected.cwiseProduct(policy).rowwise().sum();
  SignalEvaluation ev;
  ev.gain = chain.stationary.dot(per_state);
  // Z (r_pi - J 1) solves the Poisson equation and has zero d_pi-mean since d^T Z = d^T.
  ev.bias = chain.fundamental * (per_state.array() - ev.gain).matrix();
  ev.bias.array() -= chain.stationary.dot(ev.bias);
  ev.action_bias.resize(cmdp.num_states, cmdp.num_actions);
  for (int a = 0; a < cmdp.num_actions; ++a)
    ev.action_bias.col(a) = (expected.col(a).array() - ev.gain).matrix() + cmdp.transition[static_cast<std::size_t>(a)] * ev.bias;
  ev.advantage = ev.action_bias.colwise() - ev.bias;
  return ev;
}

ExactEvaluation gain_bias_advantage(const TabularCmdp& cmdp, const Matrix& policy) {
  ExactEvaluation out;
  out.chain = policy_chain(cmdp, policy);
  out.reward = evaluate_signal(cmdp, policy, out.chain, cmdp.reward);
  for (const auto& cost : cmdp.costs) out.costs.push_back(evaluate_signal(cmdp, policy, out.chain, cost));
  return out;
}

OracleSolution solve_constrained_optimal(const TabularCmdp& cmdp, const Vector& limits) {
  if (limits.size() != cmdp.num_costs()) throw std::invalid_argument("solve_constrained_optimal: one limit per cost");
  const int ns = cmdp.num_states, na = cmdp.num_actions;
  const Index n = static_cast<Index>(ns) * na;
  auto var = [na](int s, int a) { return static_cast<Index>(s) * na + a; };

  const Matrix r = cmdp.expected_reward();
  Vector objective(n);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) objective(var(s, a)) = r(s, a);

  // Flow conservation (one row per state) and normalization.
  Matrix a_eq = Matrix::Zero(ns + 1, n);
  Vector b_eq = Vector::Zero(ns + 1);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      a_eq(s, var(s, a)) += 1.0;
      for (int sp = 0; sp < ns; ++sp) a_eq(sp, var(s, a)) -= cmdp.transition[static_cast<std::size_t>(a)](s, sp);
      a_eq(ns, var(s, a)) = 1.0;
    }
  }
  b_eq(ns) = 1.0;

  std::vector<int> active;
  for (int i = 0; i < cmdp.num_costs(); ++i)
    if (std::isfinite(limits(i))) active.push_back(i);
  Matrix a_ub(static_cast<Index>(active.size()), n);
  Vector b_ub(static_cast<Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Matrix c = cmdp.expected_cost(active[k]);
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a) a_ub(static_cast<Index>(k), var(s, a)) = c(s, a);
    b_ub(static_cast<Index>(k)) = limits(active[k]);
  }

  const LpResult lp = solve_lp(objective, a_eq, b_eq, a_ub, b_ub);
  OracleSolution out;
  out.occupation = Matrix::Zero(ns, na);
  out.policy = cmdp.uniform_policy();
  if (lp.status == LpStatus::infeasible) return out;
  if (lp.status == LpStatus::unbounded) throw std::runtime_error("solve_constrained_optimal: LP unbounded");

  const double flow_residual = (a_eq * lp.x - b_eq).cwiseAbs().maxCoeff();
  const double cost_excess = active.empty() ? 0.0 : (a_ub * lp.x - b_ub).maxCoeff();
  if (flow_residual > 1e-8 || cost_excess > 1e-8) {
    std::ostringstream msg;
    msg << "solve_constrained_optimal: LP numerical failure (flow residual " << flow_residual
        << ", constraint excess " << cost_excess << ")";
    throw std::runtime_error(msg.str());
  }
  out.feasible = true;
  out.gain = lp.objective;
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) out.occupation(s, a) = lp.x(var(s, a));
    const double mass = out.occupation.row(s).sum();
    if (mass > 1e-12) out.policy.row(s) = out.occupation.row(s) / mass;
  }
  return out;
}

PolicyIterationResult average_reward_policy_iteration(const TabularCmdp& cmdp, int max_iters) {
  const Matrix r = cmdp.expected_reward();
  std::vector<int> greedy(static_cast<std::size_t>(cmdp.num_states), 0);
  PolicyIterationResult out;
  out.policy = Matrix::Zero(cmdp.num_states, cmdp.num_actions);
  for (int s = 0; s < cmdp.num_states; ++s) out.policy(s, 0) = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const ChainAnalysis chain = policy_chain(cmdp, out.policy);
    const SignalEvaluation ev = evaluate_signal(cmdp, out.policy, chain, cmdp.reward);
    out.gain = ev.gain;
    out.iterations = it + 1;
    bool changed = false;
    for (int s = 0; s < cmdp.num_states; ++s) {
      const auto cur = greedy[static_cast<std::size_t>(s)];
      int best = cur;
      for (int a = 0; a < cmdp.num_actions; ++a)
        if (ev.action_bias(s, a) > ev.action_bias(s, best) + 1e-12) best = a;
      if (best != cur) {
        greedy[static_cast<std::size_t>(s)] = best;
        out.policy.row(s).setZero();
        out.policy(s, best) = 1.0;
        changed = true;
      }
    }
    if (!changed) return out;
  }
  throw std::runtime_error("average_reward_policy_iteration: no convergence");
}

Vector discounted_occupancy(const TabularCmdp& cmdp, const Matrix& policy, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  const Matrix P = cmdp.induced_transition(policy);
  const Matrix m = Matrix::Identity(cmdp.num_states, cmdp.num_states) - gamma * P;
  return (1.0 - gamma) * m.transpose().partialPivLu().solve(cmdp.initial_dist);
}

Matrix discounted_advantage(const TabularCmdp& cmdp, const Matrix& policy, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  const Matrix P = cmdp.induced_transition(policy);
  const Matrix r = cmdp.expected_reward();
  const Vector r_pi = r.cwiseProduct(policy).rowwise().sum();
  const Vector v = (Matrix::Identity(cmdp.num_states, cmdp.num_states) - gamma * P).partialPivLu().solve(r_pi);
  Matrix adv(cmdp.num_states, cmdp.num_actions);
  for (int a = 0; a < cmdp.num_actions; ++a)
    adv.col(a) = r.col(a) + gamma * cmdp.transition[static_cast<std::size_t>(a)] * v - v;
  return adv;
}

}  // namespace acpo
