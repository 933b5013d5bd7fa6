#pragma once

#include "acpo/acpo.hpp"

namespace acpo {

/// Linearized Lagrangian-balanced objective
///   (1 - ell) g^T x - ell [(c_1 + a_1^T x) + (1/2 x^T H x - delta)].
struct LagrangianObjective {
  Vector direction;         ///< gradient at x = 0: (1 - ell) g - ell a_1
  double constant = 0.0;    ///< -ell (c_1 - delta)
  double quadratic = 0.0;   ///< coefficient of x^T H x: -ell / 2
};

LagrangianObjective lagrangian_objective(const TrustRegionProblem& problem, double ell);

/// Step along H^{-1} direction scaled to the boundary 1/2 x^T H x = delta.
Vector lagrangian_step(const TrustRegionProblem& problem, double ell);

AdvantageEstimates discounted_advantages(const RolloutBatch& batch, const Critic& reward_critic,
                                         const std::vector<Critic>& cost_critics, double gamma, double lambda_reward,
                                         double lambda_cost);

/// Normalized discounted cost of the batch seen from its first state:
/// sum_t gamma^t C_t / sum_t gamma^t.
Vector discounted_constraint_values(const RolloutBatch& batch, double gamma);

/// atrpo: constraints ignored. atrpo-lagrangian: trust-region step on the Lagrangian
/// direction. cpo-gamma: the constrained update with discounted advantages and constraint
/// values.
IterationReport baseline_iteration(Algorithm kind, const Environment& env, AgentState& agent,
                                   const UpdateSettings& settings, std::uint64_t seed, int iteration = 0);

}  // namespace acpo
