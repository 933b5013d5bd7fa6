#include "acpo/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace acpo {

LagrangianObjective lagrangian_objective(const TrustRegionProblem& problem, double ell) {
  if (!(ell >= 0.0 && ell <= 1.0)) throw std::invalid_argument("lagrangian_objective: ell outside [0, 1]");
  if (problem.num_constraints() != 1) throw std::invalid_argument("lagrangian_objective: exactly one constraint");
  LagrangianObjective out;
  out.direction = (1.0 - ell) * problem.g - ell * problem.A.col(0);
  out.constant = -ell * (problem.c(0) - problem.delta);
  out.quadratic = -0.5 * ell;
  return out;
}

Vector lagrangian_step(const TrustRegionProblem& problem, double ell) {
  const LagrangianObjective obj = lagrangian_objective(problem, ell);
  // Linear in the precomputed solves, so H^{-1} direction needs no extra CG run.
  const Vector x = (1.0 - ell) * problem.hinv_g - ell * problem.hinv_a.col(0);
  const double energy = obj.direction.dot(x);
  if (!(energy > 0.0)) return Vector::Zero(problem.dim());
  return std::sqrt(2.0 * problem.delta / energy) * x;
}

AdvantageEstimates discounted_advantages(const RolloutBatch& batch, const Critic& reward_critic,
                                         const std::vector<Critic>& cost_critics, double gamma, double lambda_reward,
                                         double lambda_cost) {
  return discounted_gae(batch, reward_critic, cost_critics, gamma, lambda_reward, lambda_cost);
}

Vector discounted_constraint_values(const RolloutBatch& batch, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discounted_constraint_values: gamma outside (0, 1)");
  Vector acc = Vector::Zero(batch.num_costs());
  double weight = 1.0, total = 0.0;
  for (Index t = 0; t < batch.size(); ++t, weight *= gamma) {
    acc += weight * batch.costs.row(t).transpose();
    total += weight;
  }
  return acc / total;
}

IterationReport baseline_iteration(Algorithm kind, const Environment& env, AgentState& agent,
                                   const UpdateSettings& settings, std::uint64_t seed, int iteration) {
  UpdateSettings s = settings;
  s.algorithm = kind;
  return policy_update(env, agent, s, seed, iteration);
}

}  // namespace acpo
