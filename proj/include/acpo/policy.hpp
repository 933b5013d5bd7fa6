#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "acpo/linalg.hpp"
#include "acpo/mlp.hpp"

namespace acpo {

enum class PolicyFlavor { tabular_softmax, gaussian_mlp };

std::string to_string(PolicyFlavor flavor);

/// Differentiable stochastic policy over a flat parameter vector. States and actions are
/// vectors; tabular ones hold a single index.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyFlavor flavor() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;

  virtual const Vector& params() const = 0;
  virtual void set_params(const Vector& params) = 0;
  Index num_params() const { return params().size(); }

  virtual double log_prob(const Vector& state, const Vector& action) const = 0;
  virtual Vector grad_log_prob(const Vector& state, const Vector& action) const = 0;
  virtual Vector sample(const Vector& state, Rng& rng) const = 0;
  /// Deterministic action: argmax (tabular) or the mean (Gaussian).
  virtual Vector mode(const Vector& state) const = 0;

  /// KL(this(.|s) || other(.|s)); throws when flavors or shapes differ.
  virtual double kl(const Policy& other, const Vector& state) const = 0;

  /// Average over the rows of `states` of F(s) v, F(s) the Fisher matrix of pi(.|s).
  virtual Vector mean_fisher_vector_product(const Matrix& states, const Vector& v) const = 0;

  virtual void write(std::ostream& out) const = 0;
};

/// Softmax over per-state logits; parameter block s holds the |A| logits of state s.
class TabularSoftmaxPolicy final : public Policy {
 public:
  TabularSoftmaxPolicy(int num_states, int num_actions);

  static TabularSoftmaxPolicy from_logits(int num_states, int num_actions, const Vector& logits);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  Vector probabilities(int state) const;
  /// |S| x |A| action-probability matrix.
  Matrix policy_matrix() const;

  PolicyFlavor flavor() const override { return PolicyFlavor::tabular_softmax; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<TabularSoftmaxPolicy>(*this); }
  const Vector& params() const override { return logits_; }
  void set_params(const Vector& params) override;
  double log_prob(const Vector& state, const Vector& action) const override;
  Vector grad_log_prob(const Vector& state, const Vector& action) const override;
  Vector sample(const Vector& state, Rng& rng) const override;
  Vector mode(const Vector& state) const override;
  double kl(const Policy& other, const Vector& state) const override;
  Vector mean_fisher_vector_product(const Matrix& states, const Vector& v) const override;
  void write(std::ostream& out) const override;

 private:
  int index_of(const Vector& state) const;

  int num_states_;
  int num_actions_;
  Vector logits_;
};

/// Diagonal Gaussian whose mean is an MLP of the (optionally normalized) state and whose
/// log standard deviations are free, state-independent parameters appended after the
/// network weights.
class GaussianMlpPolicy final : public Policy {
 public:
  GaussianMlpPolicy(int state_dim, int action_dim, std::vector<int> hidden, double initial_log_std, Rng& rng);
  GaussianMlpPolicy(Mlp mean_net, Vector log_std);

  const Mlp& mean_net() const { return net_; }
  Vector log_std() const { return params_.tail(action_dim_); }
  Vector mean(const Vector& state) const;

  /// Fixed affine state normalization (x - mean) / std applied before the network.
  void set_observation_normalizer(const Vector& mean, const Vector& std);
  const Vector& observation_mean() const { return obs_mean_; }
  const Vector& observation_std() const { return obs_std_; }

  PolicyFlavor flavor() const override { return PolicyFlavor::gaussian_mlp; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<GaussianMlpPolicy>(*this); }
  const Vector& params() const override { return params_; }
  void set_params(const Vector& params) override;
  double log_prob(const Vector& state, const Vector& action) const override;
  Vector grad_log_prob(const Vector& state, const Vector& action) const override;
  Vector sample(const Vector& state, Rng& rng) const override;
  Vector mode(const Vector& state) const override { return mean(state); }
  double kl(const Policy& other, const Vector& state) const override;
  Vector mean_fisher_vector_product(const Matrix& states, const Vector& v) const override;
  void write(std::ostream& out) const override;

 private:
  Vector normalize(const Vector& state) const;

  int action_dim_;
  Mlp net_;
  Vector params_;  // [network weights; log std]
  Vector obs_mean_;
  Vector obs_std_;
};

std::unique_ptr<Policy> read_policy(std::istream& in);

// Free-function surface used by the estimators and the update.

inline double log_prob(const Policy& policy, const Vector& state, const Vector& action) {
  return policy.log_prob(state, action);
}

inline Vector sample_action(const Policy& policy, const Vector& state, Rng& rng) { return policy.sample(state, rng); }

/// Mean over the rows of `states` of KL(new(.|s) || old(.|s)).
double mean_kl(const Policy& new_policy, const Policy& old_policy, const Matrix& states);

/// Weighted mean of grad log pi(a_t|s_t) * adv_t; uniform weights when `weights` is empty.
Vector surrogate_gradient(const Policy& policy, const Matrix& states, const Matrix& actions, const Vector& advantages,
                          const Vector& weights = Vector());

/// Importance-weighted surrogate mean exp(log pi(a|s) - old_log_prob) * adv, whose gradient
/// at the sampling parameters is surrogate_gradient.
double surrogate_value(const Policy& policy, const Matrix& states, const Matrix& actions, const Vector& old_log_probs,
                       const Vector& advantages);

/// (H + damping I) v with H the Hessian of mean_kl(., policy) at the policy itself.
Vector kl_hessian_vector_product(const Policy& policy, const Matrix& states, const Vector& v, double damping);

LinearOperator<double> make_kl_hessian_operator(const Policy& policy, const Matrix& states, double damping);

}  // namespace acpo
