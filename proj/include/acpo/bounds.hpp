#pragma once

#include <string>
#include <utility>
#include <vector>

#include "acpo/exact.hpp"

namespace acpo {

/// One numerical certificate: lhs <= rhs is the claimed inequality (identities are
/// phrased as |residual| <= tolerance).
struct BoundReport {
  static constexpr double kSlackTol = -1e-9;

  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = true;
  /// False for quantities that are computed and logged but not claimed to hold.
  bool asserted = true;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> context;

  double context_value(const std::string& key) const;
};

BoundReport make_bound_report(std::string name, double lhs, double rhs);

/// E_{s~d}[TV(pi'(.|s), pi(.|s))]
double expected_policy_tv(const Vector& d, const Matrix& pi_new, const Matrix& pi_old);
/// E_{s~d}[KL(pi'(.|s) || pi(.|s))]
double expected_policy_kl(const Vector& d, const Matrix& pi_new, const Matrix& pi_old);
/// max_s |E_{a~pi'}[adv(s, a)]|
double max_expected_advantage(const Matrix& pi_new, const Matrix& advantage);

/// |J(pi') - J(pi) - E_{d_pi', pi'}[A^pi]| against tolerance 1e-8.
BoundReport check_policy_difference_identity(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new);

/// |J(pi') - J(pi) - E_{d_pi, pi'}[A^pi]| <= 2 eps TV(d_pi', d_pi).
BoundReport check_surrogate_error_bound(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new);

/// Sampled lower estimate of the policy-maximal mixing constants.
struct MixingEstimate {
  double sigma = 0.0;
  double kemeny = 0.0;
};

/// max of sigma^pi and Tr(Z^pi) over {pi, pi', `samples` random policies}.
MixingEstimate estimate_mixing_constants(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new, int samples,
                                         Rng& rng);

/// TV(d_pi', d_pi) <= sigma* E_{d_pi}[TV(pi', pi)]. A failure with the sampled sigma* is
/// re-checked with the Kemeny constant in its place before it is reported as violated.
BoundReport check_stationary_tv_bound(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                      const MixingEstimate& mixing);

struct ImprovementBounds {
  double lower = 0.0;  ///< L^-
  double upper = 0.0;  ///< L^+
  Vector cost_lower;   ///< M^-_i
  Vector cost_upper;   ///< M^+_i
  std::vector<BoundReport> reports;
};

/// Reward and cost sandwich bounds with nu = sigma* max_s |E_{pi'}[A]|, their KL-relaxed
/// versions, and the Pinsker/Jensen step itself.
ImprovementBounds improvement_bounds(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                     double sigma_star);

/// Worst-case degradation and violation guarantees of one trust-region update, reported
/// under both V_max conventions: max_i beta_i^2 and max_i alpha_i beta_i^2 with
/// alpha_i = 1 / (2 a_i^T H^+ a_i) from the exact softmax gradients at pi_k. The context
/// value "hypotheses" is 1 when pi_next is feasible for the exact trust-region problem with
/// radius delta + V_max and does not lower its exact surrogate.
std::vector<BoundReport> trust_region_guarantees(const TabularCmdp& cmdp, const Matrix& pi_k, const Matrix& pi_next,
                                                 double delta, const Vector& limits);

/// a^T H^+ a for the exact softmax-logit Fisher matrix weighted by d (blockwise pseudo-inverse).
double softmax_fisher_quadratic(const Vector& d, const Matrix& pi, const Matrix& gradient);

struct TrivializationPoint {
  double gamma = 0.0;
  double penalty = 0.0;      ///< 2 gamma eps_gamma E_{d_gamma}[TV] / (1 - gamma)
  double epsilon = 0.0;      ///< max_s |E_{a~pi'}[A_gamma(s,a)]|
  double expected_tv = 0.0;  ///< E_{s~d_gamma}[TV(pi', pi)[s]]
  double scale = 0.0;        ///< gamma / (1 - gamma)
};

/// Penalty of the discounted improvement bound after multiplying by (1 - gamma), per gamma.
std::vector<TrivializationPoint> trivialization_demo(const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new,
                                                     const std::vector<double>& gamma_grid);

}  // namespace acpo
