#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "acpo/estimation.hpp"
#include "acpo/linalg.hpp"
#include "acpo/policy.hpp"

namespace acpo {

enum class Algorithm { acpo, atrpo, atrpo_lagrangian, cpo_gamma };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

/// Hyperparameters of one policy-update iteration.
struct UpdateSettings {
  Algorithm algorithm = Algorithm::acpo;
  double delta = 1e-4;
  double lambda_reward = 0.95;
  double lambda_cost = 0.95;
  Index batch_size = 2500;
  double recovery_t = 0.75;
  double backtrack_coeff = 0.75;
  int backtrack_max = 10;
  double line_search_slack = 0.0;
  int cg_iters = 10;
  double damping = 1e-5;
  double critic_lr = 2e-4;
  double cost_critic_lr = 2e-4;
  int critic_epochs = 5;
  bool normalize_advantages = false;
  double lagrange_ell = 0.5;
  double gamma = 0.999;
  /// States collected from a separate rollout of the pre-update policy to measure KL on
  /// states the update never saw; 0 disables.
  Index fresh_kl_states = 0;
};

/// Local linear-quadratic model around the current parameters:
///   max g^T x  s.t.  c + A^T x <= 0,  1/2 x^T H x <= delta.
/// The CG solves H^{-1} g and H^{-1} a_i are cached at construction.
struct TrustRegionProblem {
  Vector g;
  Matrix A;  // d x m
  Vector c;
  LinearOperator<double> H;
  double delta = 0.0;
  int cg_iters = 10;
  Matrix probe_states;
  /// Positions of the kept constraints among the environment's cost streams.
  std::vector<int> constraint_index;

  Vector hinv_g;
  Matrix hinv_a;
  double q = 0.0;  // g^T H^{-1} g
  Vector r;        // A^T H^{-1} g
  Matrix S;        // A^T H^{-1} A

  Index dim() const { return g.size(); }
  int num_constraints() const { return static_cast<int>(A.cols()); }
};

TrustRegionProblem make_problem(Vector g, Matrix A, Vector c, LinearOperator<double> H, double delta, int cg_iters,
                                Matrix probe_states = Matrix());

/// Relative asymmetry |u^T H v - v^T H u| / (|u^T H v| + |v^T H u| + tiny) for random u, v.
double symmetry_probe(const LinearOperator<double>& H, Rng& rng);

/// g and a_i from the surrogate gradients of the advantage streams, c_i = J_Ci - l_i, and
/// H the damped KL Hessian over the batch states.
TrustRegionProblem build_local_problem(const RolloutBatch& batch, const Policy& policy,
                                       const AdvantageEstimates& advantages, const Vector& constraint_values,
                                       const Vector& limits, const UpdateSettings& settings);

enum class Feasibility { feasible, infeasible };

/// m = 1: infeasible iff c > 0 and c^2 / (a^T H^{-1} a) > 2 delta. m > 1: phase-one QP
/// max_{mu >= 0} mu^T c - 1/2 mu^T S mu compared against delta.
Feasibility classify_feasibility(const TrustRegionProblem& problem);

/// Squared H-norm over two of the smallest step meeting the linearized constraints.
double minimum_constraint_energy(const TrustRegionProblem& problem);

enum class DualCase { interior, constraint_active, infeasible_detected };

std::string to_string(DualCase kind);

struct DualSolution {
  double lambda = 0.0;
  Vector mu;
  std::vector<bool> active;
  DualCase kind = DualCase::interior;
  /// min over (lambda, mu) of (q - 2 r^T mu + mu^T S mu) / (2 lambda) + lambda delta - mu^T c,
  /// which equals the primal optimum of g^T x.
  double objective = 0.0;
};

/// Dual objective at (lambda, mu) in the minimization form above.
double dual_objective(const TrustRegionProblem& problem, double lambda, const Vector& mu);

/// The same expression with the trust-region term halved, as sometimes written.
double transcribed_dual_objective(const TrustRegionProblem& problem, double lambda, const Vector& mu);

DualSolution solve_dual(const TrustRegionProblem& problem);

/// x = H^{-1}(g - A mu) / lambda; when lambda = 0 the minimum-energy point on the active
/// constraints. Scaled back onto the trust region if CG error pushes it outside.
Vector primal_step(const TrustRegionProblem& problem, const DualSolution& dual);

/// -sqrt(2 delta) [t H^{-1}a / sqrt(a^T H^{-1} a) + (1 - t) H^{-1}g / sqrt(g^T H^{-1} g)]
/// using the most violated constraint when m > 1.
Vector recovery_step(const TrustRegionProblem& problem, double t);

enum class StepKind { dual_step, recovery, no_update };

std::string to_string(StepKind kind);

struct IterationReport {
  int iteration = 0;
  StepKind kind = StepKind::no_update;
  std::string dual_case;
  double lambda = 0.0;
  Vector mu;
  double kl = 0.0;
  double fresh_kl = -1.0;
  int backtracks = -1;
  double surrogate_change = 0.0;
  double proposal_energy = 0.0;
  Vector linearized;
  double gain_before = 0.0;
  Vector cost_gain_before;
  double gain_after = 0.0;
  Vector cost_gain_after;
  double transcribed_dual = 0.0;
  std::string error;
};

using KlMeasure = std::function<double(const Vector& params)>;

struct LineSearchResult {
  Vector params;
  bool accepted = false;
  int exponent = -1;
  double kl = 0.0;
  Vector linearized;
};

/// Smallest j in 0..L with KL(theta + s^j dx) <= delta and, per constraint,
/// c_i + s^j a_i^T dx <= slack or (c_i > slack and a_i^T dx < 0).
LineSearchResult line_search(const Vector& params, const Vector& step, const TrustRegionProblem& problem,
                             const KlMeasure& kl, double coeff, int max_backtracks, double slack = 0.0);

/// Policy, critics and the trajectory's current state.
struct AgentState {
  std::unique_ptr<Policy> policy;
  Critic reward_critic;
  std::vector<Critic> cost_critics;
  Vector state;

  AgentState() = default;
  AgentState(const AgentState& other);
  AgentState& operator=(const AgentState& other);
  AgentState(AgentState&&) = default;
  AgentState& operator=(AgentState&&) = default;
};

AgentState make_agent(const Environment& env, std::unique_ptr<Policy> policy, CriticFlavor critic, Rng& rng,
                      const std::vector<int>& critic_hidden = {16, 16});

/// One outer iteration for any algorithm: sample, estimate, build the local problem, step,
/// line-search and refit the critics. The agent is only modified when the iteration
/// completes; errors are reported in IterationReport::error.
IterationReport policy_update(const Environment& env, AgentState& agent, const UpdateSettings& settings,
                              std::uint64_t seed, int iteration = 0);

/// policy_update with the ACPO rule regardless of settings.algorithm.
IterationReport acpo_iteration(const Environment& env, AgentState& agent, const UpdateSettings& settings,
                               std::uint64_t seed, int iteration = 0);

}  // namespace acpo
