#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "acpo/cmdp.hpp"
#include "acpo/mlp.hpp"
#include "acpo/policy.hpp"

namespace acpo {

/// One continuing trajectory segment: row t of next_states equals row t+1 of states.
struct RolloutBatch {
  Matrix states;
  Matrix actions;
  Matrix next_states;
  Vector rewards;
  Matrix costs;  // N x m
  Vector log_probs;
  std::uint64_t seed = 0;

  Index size() const { return rewards.size(); }
  int num_costs() const { return static_cast<int>(costs.cols()); }
  Vector final_state() const { return next_states.row(next_states.rows() - 1).transpose(); }
};

/// Rolls the policy forward `n` steps from `start` using a stream seeded by `seed`.
RolloutBatch collect_batch(const Environment& env, const Policy& policy, const Vector& start, Index n,
                           std::uint64_t seed);

void write_batch_csv(std::ostream& out, const RolloutBatch& batch);

struct GainEstimates {
  double reward = 0.0;
  Vector costs;
};

GainEstimates estimate_gains(const RolloutBatch& batch);

/// Backward GAE pass shared by every signal stream:
///   delta_t = signal_t - offset + discount * next_values_t - values_t
///   A_t     = delta_t + discount * lambda * A_{t+1},  A_N = 0.
Vector generalized_advantages(const Vector& signal, const Vector& values, const Vector& next_values, double offset,
                              double discount, double lambda);

enum class CriticFlavor { tabular, linear, mlp };

std::string to_string(CriticFlavor flavor);
CriticFlavor parse_critic_flavor(const std::string& name);

/// State-value regressor. Tabular critics index a value table by state; linear critics use
/// features (1, x, x^2); MLP critics use a tanh network.
class Critic {
 public:
  Critic() = default;
  static Critic tabular(int num_states);
  static Critic linear(int state_dim);
  static Critic mlp(int state_dim, std::vector<int> hidden, Rng& rng);
  /// Exact tabular values, e.g. the bias from exact analysis.
  static Critic from_table(const Vector& values);

  CriticFlavor flavor() const { return flavor_; }
  const Vector& params() const { return params_; }
  void set_params(const Vector& params);

  void set_observation_normalizer(const Vector& mean, const Vector& std);

  double value(const Vector& state) const;
  Vector values(const Matrix& states) const;

  /// Mean-squared-error regression toward `targets`. Tabular critics take one exact
  /// full-batch gradient step per epoch; the others run Adam over shuffled minibatches.
  /// Returns the loss after each epoch.
  std::vector<double> fit(const Matrix& states, const Vector& targets, double learning_rate, int epochs, Rng& rng,
                          int minibatch = 64);

  double loss(const Matrix& states, const Vector& targets) const;

 private:
  Vector input(const Vector& state) const;
  Vector features(const Vector& state) const;
  Vector gradient(const Matrix& states, const Vector& targets, const std::vector<Index>& rows) const;

  CriticFlavor flavor_ = CriticFlavor::tabular;
  Vector params_;
  Mlp net_;
  Vector obs_mean_, obs_std_;
  // Adam moments
  Vector m_, v_;
  long step_ = 0;
};

/// Per-transition advantages and value targets for the reward and each cost.
struct AdvantageEstimates {
  Vector reward;
  Matrix costs;  // N x m
  Vector reward_targets;
  Matrix cost_targets;
  GainEstimates gains;
  double lambda_reward = 0.0;
  double lambda_cost = 0.0;
};

/// Average-reward GAE: offset = batch gain, discount = 1. Targets are A_t + V(s_t).
AdvantageEstimates average_gae(const RolloutBatch& batch, const Critic& reward_critic,
                               const std::vector<Critic>& cost_critics, const GainEstimates& gains,
                               double lambda_reward, double lambda_cost);

/// Discounted GAE: offset = 0, discount = gamma.
AdvantageEstimates discounted_gae(const RolloutBatch& batch, const Critic& reward_critic,
                                  const std::vector<Critic>& cost_critics, double gamma, double lambda_reward,
                                  double lambda_cost);

std::vector<double> fit_critic(Critic& critic, const RolloutBatch& batch, const Vector& targets, double learning_rate,
                               int epochs, Rng& rng);

}  // namespace acpo
