#include "acpo/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "acpo/linalg.hpp"

namespace acpo {

double BoundReport::context_value(const std::string& key) const {
  for (const auto& [k, v] : context)
    if (k == key) return v;
  throw std::out_of_range("BoundReport: no context value " + key);
}

BoundReport make_bound_report(std::string name, double lhs, double rhs) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = r.slack >= BoundReport::kSlackTol;
  return r;
}

double expected_policy_tv(const Vector& d, const Matrix& pi_new, const Matrix& pi_old) {
  double acc = 0.0;
  for (Index s = 0; s < d.size(); ++s) acc += d(s) * total_variation(pi_new.row(s), pi_old.row(s));
  return acc;
}

double expected_policy_kl(const Vector& d, const Matrix& pi_new, const Matrix& pi_old) {
  double acc = 0.0;
  for (Index s = 0; s < d.size(); ++s) acc += d(s) * categorical_kl(pi_new.row(s), pi_old.row(s));
  return acc;
}

double max_expected_advantage(const Matrix& pi_new, const Matrix& advantage) {
  return pi_new.cwiseProduct(advantage).rowwise().sum().cwiseAbs().maxCoeff();
}

namespace {

// E_{s~d, a~pi'}[adv(s,a)]
double surrogate(const Vector& d, const Matrix& pi_new, const Matrix& advantage) {
  return d.dot(pi_new.cwiseProduct(advantage).rowwise().sum());
}

}  // namespace

BoundReport check_policy_difference_identity(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new) {
  const ExactEvaluation old_ev = gain_bias_advantage(cmdp, pi);
  const ExactEvaluation new_ev = gain_bias_advantage(cmdp, pi_new);
  const double diff = new_ev.reward.gain - old_ev.reward.gain;
  const double expected = surrogate(new_ev.chain.stationary, pi_new, old_ev.reward.advantage);
  BoundReport r = make_bound_report("policy_difference_identity", std::abs(diff - expected), 1e-8);
  r.context = {{"gain_difference", diff}, {"expected_advantage", expected}};
  return r;
}

BoundReport check_surrogate_error_bound(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new) {
  const ExactEvaluation old_ev = gain_bias_advantage(cmdp, pi);
  const ChainAnalysis new_chain = policy_chain(cmdp, pi_new);
  const SignalEvaluation new_reward = evaluate_signal(cmdp, pi_new, new_chain, cmdp.reward);
  const double diff = new_reward.gain - old_ev.reward.gain;
  const double surr = surrogate(old_ev.chain.stationary, pi_new, old_ev.reward.advantage);
  const double eps = max_expected_advantage(pi_new, old_ev.reward.advantage);
  const double tv = total_variation(new_chain.stationary, old_ev.chain.stationary);
  BoundReport r = make_bound_report("surrogate_error_bound", std::abs(diff - surr), 2.0 * eps * tv);
  r.context = {{"epsilon", eps}, {"stationary_tv", tv}};
  return r;
}

MixingEstimate estimate_mixing_constants(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new, int samples,
                                         Rng& rng) {
  MixingEstimate est;
  auto absorb = [&](const Matrix& policy) {
    const ChainAnalysis chain = policy_chain(cmdp, policy);
    est.sigma = std::max(est.sigma, chain.sigma);
    est.kemeny = std::max(est.kemeny, chain.kemeny);
  };
  absorb(pi);
  absorb(pi_new);
  for (int k = 0; k < samples; ++k) absorb(random_policy(cmdp.num_states, cmdp.num_actions, rng));
  return est;
}

BoundReport check_stationary_tv_bound(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                      const MixingEstimate& mixing) {
  const ChainAnalysis old_chain = policy_chain(cmdp, pi);
  const ChainAnalysis new_chain = policy_chain(cmdp, pi_new);
  const double lhs = total_variation(new_chain.stationary, old_chain.stationary);
  const double policy_tv = expected_policy_tv(old_chain.stationary, pi_new, pi);
  BoundReport r = make_bound_report("stationary_tv_bound", lhs, mixing.sigma * policy_tv);
  const double kemeny_rhs = mixing.kemeny * policy_tv;
  r.context = {{"sigma_star", mixing.sigma},
               {"kemeny_star", mixing.kemeny},
               {"kemeny_rhs", kemeny_rhs},
               {"escalated", 0.0}};
  if (!r.holds && kemeny_rhs - lhs >= BoundReport::kSlackTol) {
    r.holds = true;
    r.context.back().second = 1.0;
  }
  return r;
}

ImprovementBounds improvement_bounds(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                     double sigma_star) {
  const ExactEvaluation old_ev = gain_bias_advantage(cmdp, pi);
  const ChainAnalysis new_chain = policy_chain(cmdp, pi_new);
  const Vector& d = old_ev.chain.stationary;
  const double tv = expected_policy_tv(d, pi_new, pi);
  const double kl = expected_policy_kl(d, pi_new, pi);
  const double tv_relaxed = std::sqrt(kl / 2.0);

  ImprovementBounds out;
  BoundReport pinsker = make_bound_report("pinsker_relaxation", tv, tv_relaxed);
  out.reports.push_back(pinsker);

  auto sandwich = [&](const std::string& label, const std::vector<Matrix>& signal, const SignalEvaluation& old_signal,
                      double& lower, double& upper) {
    const double diff = evaluate_signal(cmdp, pi_new, new_chain, signal).gain - old_signal.gain;
    const double surr = surrogate(d, pi_new, old_signal.advantage);
    const double nu = sigma_star * max_expected_advantage(pi_new, old_signal.advantage);
    lower = surr - 2.0 * nu * tv;
    upper = surr + 2.0 * nu * tv;
    for (auto [suffix, div] : {std::pair<const char*, double>{"", tv}, {"_kl", tv_relaxed}}) {
      BoundReport lo = make_bound_report(label + "_lower" + suffix, surr - 2.0 * nu * div, diff);
      BoundReport hi = make_bound_report(label + "_upper" + suffix, diff, surr + 2.0 * nu * div);
      lo.context = hi.context = {{"nu", nu}, {"surrogate", surr}, {"difference", diff}};
      out.reports.push_back(lo);
      out.reports.push_back(hi);
    }
  };
  sandwich("reward_improvement", cmdp.reward, old_ev.reward, out.lower, out.upper);
  out.cost_lower.resize(cmdp.num_costs());
  out.cost_upper.resize(cmdp.num_costs());
  for (int i = 0; i < cmdp.num_costs(); ++i) {
    double lo = 0.0, hi = 0.0;
    sandwich("cost" + std::to_string(i + 1) + "_change", cmdp.costs[static_cast<std::size_t>(i)],
             old_ev.costs[static_cast<std::size_t>(i)], lo, hi);
    out.cost_lower(i) = lo;
    out.cost_upper(i) = hi;
  }
  return out;
}

double softmax_fisher_quadratic(const Vector& d, const Matrix& pi, const Matrix& gradient) {
  double acc = 0.0;
  for (Index s = 0; s < d.size(); ++s) {
    if (d(s) <= 0.0) continue;
    const Vector p = pi.row(s).transpose();
    const Matrix block = d(s) * (Matrix(p.asDiagonal()) - p * p.transpose());
    const Vector g = gradient.row(s).transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(block);
    cod.setThreshold(1e-12);
    acc += g.dot(cod.solve(g));
  }
  return acc;
}

std::vector<BoundReport> trust_region_guarantees(const TabularCmdp& cmdp, const Matrix& pi_k, const Matrix& pi_next,
                                                 double delta, const Vector& limits) {
  if (limits.size() != cmdp.num_costs()) throw std::invalid_argument("trust_region_guarantees: one limit per cost");
  const ExactEvaluation ev_k = gain_bias_advantage(cmdp, pi_k);
  const ExactEvaluation ev_next = gain_bias_advantage(cmdp, pi_next);
  const Vector& d = ev_k.chain.stationary;
  const double sigma_next = ev_next.chain.sigma;

  double vmax_squared = 0.0, vmax_scaled = 0.0;
  double cost_spread = 0.0;
  for (int i = 0; i < cmdp.num_costs(); ++i) {
    const auto& cost = ev_k.costs[static_cast<std::size_t>(i)];
    const double beta = std::max(0.0, cost.gain - limits(i));
    // exact softmax cost gradient: d(s) pi(a|s) A_C(s, a)
    const Matrix grad = (pi_k.cwiseProduct(cost.advantage)).array().colwise() * d.array();
    const double quad = softmax_fisher_quadratic(d, pi_k, grad);
    const double alpha = quad > 0.0 ? 1.0 / (2.0 * quad) : 0.0;
    vmax_squared = std::max(vmax_squared, beta * beta);
    vmax_scaled = std::max(vmax_scaled, alpha * beta * beta);
    cost_spread = std::max(cost_spread, max_expected_advantage(pi_next, cost.advantage));
  }
  const double nu = sigma_next * max_expected_advantage(pi_next, ev_k.reward.advantage);
  const double nu_cost = sigma_next * cost_spread;

  // hypotheses: pi_next is feasible for the exact trust-region problem and improves its objective
  auto surrogate = [&](const Matrix& adv) { return d.dot(pi_next.cwiseProduct(adv).rowwise().sum()); };
  const double objective = surrogate(ev_k.reward.advantage);
  const double kl = expected_policy_kl(d, pi_next, pi_k);
  bool feasible = objective >= 0.0;
  for (int i = 0; i < cmdp.num_costs(); ++i) {
    const auto& cost = ev_k.costs[static_cast<std::size_t>(i)];
    feasible = feasible && cost.gain + surrogate(cost.advantage) <= limits(i);
  }

  std::vector<BoundReport> out;
  for (auto [label, vmax] : {std::pair<std::string, double>{"vmax_squared", vmax_squared}, {"vmax_scaled", vmax_scaled}}) {
    const double radius = std::sqrt(2.0 * (delta + vmax));
    BoundReport reward = make_bound_report("trust_region_reward_degradation_" + label,
                                           ev_k.reward.gain - ev_next.reward.gain, radius * nu);
    const double hypotheses = feasible && kl <= delta + vmax ? 1.0 : 0.0;
    reward.context = {{"vmax", vmax}, {"nu", nu}, {"sigma_next", sigma_next}, {"kl", kl},
                      {"surrogate", objective}, {"hypotheses", hypotheses}};
    out.push_back(reward);
    for (int i = 0; i < cmdp.num_costs(); ++i) {
      BoundReport cost = make_bound_report("trust_region_cost" + std::to_string(i + 1) + "_violation_" + label,
                                           ev_next.costs[static_cast<std::size_t>(i)].gain - limits(i), radius * nu_cost);
      cost.context = {{"vmax", vmax}, {"nu_cost", nu_cost}, {"sigma_next", sigma_next}, {"kl", kl},
                      {"hypotheses", hypotheses}};
      out.push_back(cost);
    }
  }
  return out;
}

std::vector<TrivializationPoint> trivialization_demo(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                                     const std::vector<double>& gamma_grid) {
  std::vector<TrivializationPoint> out;
  double previous = 0.0;
  for (double gamma : gamma_grid) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("trivialization_demo: gamma must lie in (0, 1)");
    if (!out.empty() && !(gamma > previous)) throw std::invalid_argument("trivialization_demo: grid must ascend");
    previous = gamma;
    TrivializationPoint p;
    p.gamma = gamma;
    const Vector d_gamma = discounted_occupancy(cmdp, pi, gamma);
    p.epsilon = max_expected_advantage(pi_new, discounted_advantage(cmdp, pi, gamma));
    p.expected_tv = expected_policy_tv(d_gamma, pi_new, pi);
    p.scale = gamma / (1.0 - gamma);
    p.penalty = 2.0 * p.scale * p.epsilon * p.expected_tv;
    out.push_back(p);
  }
  return out;
}

}  // namespace acpo
