#pragma once

#include <vector>

#include "acpo/cmdp.hpp"

namespace acpo {

/// Markov-chain facts for the chain a policy induces.
struct ChainAnalysis {
  Matrix transition;             ///< P_pi, row-stochastic
  Vector stationary;             ///< d_pi
  Eigen::VectorXcd eigenvalues;  ///< spectrum of P_pi
  double sigma = 0.0;            ///< max over non-unit eigenvalues of |1 - lambda|^(-1/2)
  double kemeny = 0.0;           ///< Tr(Z), Z = (I - P + 1 d^T)^(-1)
  Matrix fundamental;            ///< Z
};

/// Gain, bias, action-bias and advantage for one signal (reward or a cost).
struct SignalEvaluation {
  double gain = 0.0;
  Vector bias;          ///< normalized so that E_{d_pi}[bias] = 0
  Matrix action_bias;   ///< |S| x |A|
  Matrix advantage;     ///< action_bias - bias
};

struct ExactEvaluation {
  ChainAnalysis chain;
  SignalEvaluation reward;
  std::vector<SignalEvaluation> costs;
};

/// Occupation-measure LP optimum.
struct OracleSolution {
  bool feasible = false;
  double gain = 0.0;
  Matrix occupation;  ///< x(s, a)
  Matrix policy;      ///< x(s,a) / sum_a x(s,a), uniform where the row is empty
};

/// Spectral and stationary analysis of a row-stochastic matrix.
ChainAnalysis analyze_chain(const Matrix& P);

/// Throws std::invalid_argument for a policy whose rows are not distributions,
/// std::domain_error for a non-ergodic induced chain.
ChainAnalysis policy_chain(const TabularCmdp& cmdp, const Matrix& policy);

SignalEvaluation evaluate_signal(const TabularCmdp& cmdp, const Matrix& policy, const ChainAnalysis& chain,
                                 const std::vector<Matrix>& signal);

ExactEvaluation gain_bias_advantage(const TabularCmdp& cmdp, const Matrix& policy);

/// Maximizes long-run reward over occupation measures under J_Ci <= limits(i).
/// Infinite limits drop the corresponding constraint. Throws std::runtime_error when the
/// solved measure fails the flow/normalization residual checks.
OracleSolution solve_constrained_optimal(const TabularCmdp& cmdp, const Vector& limits);

/// Unconstrained average-reward policy iteration over deterministic policies.
struct PolicyIterationResult {
  Matrix policy;
  double gain = 0.0;
  int iterations = 0;
};
PolicyIterationResult average_reward_policy_iteration(const TabularCmdp& cmdp, int max_iters = 1000);

// Discounted quantities, used to exhibit how the discounted bound degenerates.

/// (1 - gamma) mu^T (I - gamma P_pi)^{-1}
Vector discounted_occupancy(const TabularCmdp& cmdp, const Matrix& policy, double gamma);

/// A_gamma(s, a) = Q_gamma(s, a) - V_gamma(s) for the reward signal.
Matrix discounted_advantage(const TabularCmdp& cmdp, const Matrix& policy, double gamma);

/// Checks rows are nonnegative and sum to one within 1e-9.
void require_policy(const TabularCmdp& cmdp, const Matrix& policy);

/// Per-state Dirichlet(1,..,1) random policy.
Matrix random_policy(int num_states, int num_actions, Rng& rng);

}  // namespace acpo
