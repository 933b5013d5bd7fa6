#include "acpo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace acpo {

RolloutBatch collect_batch(const Environment& env, const Policy& policy, const Vector& start, Index n,
                           std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("collect_batch: need at least two transitions");
  Rng rng(seed);
  const int m = env.num_costs();
  RolloutBatch b;
  b.seed = seed;
  b.states.resize(n, env.state_dim());
  b.actions.resize(n, env.action_dim());
  b.next_states.resize(n, env.state_dim());
  b.rewards.resize(n);
  b.costs.resize(n, m);
  b.log_probs.resize(n);
  Vector s = start;
  for (Index t = 0; t < n; ++t) {
    const Vector a = policy.sample(s, rng);
    Transition tr = env.step(s, a, rng);
    b.states.row(t) = s.transpose();
    b.actions.row(t) = a.transpose();
    b.next_states.row(t) = tr.next_state.transpose();
    b.rewards(t) = tr.reward;
    b.costs.row(t) = tr.costs.transpose();
    b.log_probs(t) = policy.log_prob(s, a);
    s = std::move(tr.next_state);
  }
  return b;
}

void write_batch_csv(std::ostream& out, const RolloutBatch& batch) {
  const Index ds = batch.states.cols(), da = batch.actions.cols();
  out << "t";
  for (Index j = 0; j < ds; ++j) out << ",s" << j;
  for (Index j = 0; j < da; ++j) out << ",a" << j;
  out << ",reward";
  for (int i = 0; i < batch.num_costs(); ++i) out << ",cost" << i + 1;
  for (Index j = 0; j < ds; ++j) out << ",next_s" << j;
  out << ",log_prob\n" << std::setprecision(17);
  for (Index t = 0; t < batch.size(); ++t) {
    out << t;
    for (Index j = 0; j < ds; ++j) out << ',' << batch.states(t, j);
    for (Index j = 0; j < da; ++j) out << ',' << batch.actions(t, j);
    out << ',' << batch.rewards(t);
    for (int i = 0; i < batch.num_costs(); ++i) out << ',' << batch.costs(t, i);
    for (Index j = 0; j < ds; ++j) out << ',' << batch.next_states(t, j);
    out << ',' << batch.log_probs(t) << '\n';
  }
}

GainEstimates estimate_gains(const RolloutBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("estimate_gains: empty batch");
  return {batch.rewards.mean(), batch.costs.colwise().mean().transpose()};
}

Vector generalized_advantages(const Vector& signal, const Vector& values, const Vector& next_values, double offset,
                              double discount, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("generalized_advantages: lambda outside [0, 1]");
  const Index n = signal.size();
  if (values.size() != n || next_values.size() != n)
    throw std::invalid_argument("generalized_advantages: length mismatch");
  const double decay = discount * lambda;
  Vector adv(n);
  double acc = 0.0;
  for (Index t = n - 1; t >= 0; --t) {
    const double delta = signal(t) - offset + discount * next_values(t) - values(t);
    acc = decay == 0.0 ? delta : delta + decay * acc;
    adv(t) = acc;
  }
  if (!adv.allFinite()) throw std::domain_error("generalized_advantages: non-finite advantage");
  return adv;
}

// --- critic -----------------------------------------------------------------

std::string to_string(CriticFlavor flavor) {
  switch (flavor) {
    case CriticFlavor::tabular: return "tabular";
    case CriticFlavor::linear: return "linear";
    case CriticFlavor::mlp: return "mlp";
  }
  return "?";
}

CriticFlavor parse_critic_flavor(const std::string& name) {
  if (name == "tabular") return CriticFlavor::tabular;
  if (name == "linear") return CriticFlavor::linear;
  if (name == "mlp") return CriticFlavor::mlp;
  throw std::invalid_argument("unknown critic flavor: " + name);
}

Critic Critic::tabular(int num_states) {
  if (num_states < 1) throw std::invalid_argument("Critic::tabular: need at least one state");
  return from_table(Vector::Zero(num_states));
}

Critic Critic::from_table(const Vector& values) {
  Critic c;
  c.flavor_ = CriticFlavor::tabular;
  c.params_ = values;
  return c;
}

Critic Critic::linear(int state_dim) {
  Critic c;
  c.flavor_ = CriticFlavor::linear;
  c.params_ = Vector::Zero(1 + 2 * state_dim);
  return c;
}

Critic Critic::mlp(int state_dim, std::vector<int> hidden, Rng& rng) {
  Critic c;
  c.flavor_ = CriticFlavor::mlp;
  c.net_ = Mlp(state_dim, std::move(hidden), 1);
  c.net_.initialize(rng, 1.0);
  c.params_ = c.net_.params();
  return c;
}

void Critic::set_params(const Vector& params) {
  if (params.size() != params_.size()) throw std::invalid_argument("Critic::set_params: size mismatch");
  params_ = params;
  if (flavor_ == CriticFlavor::mlp) net_.set_params(params);
}

void Critic::set_observation_normalizer(const Vector& mean, const Vector& std) {
  if (mean.size() != std.size() || (std.array() <= 0.0).any())
    throw std::invalid_argument("Critic: bad observation normalizer");
  obs_mean_ = mean;
  obs_std_ = std;
}

Vector Critic::input(const Vector& state) const {
  if (obs_mean_.size() == 0) return state;
  return (state - obs_mean_).cwiseQuotient(obs_std_);
}

Vector Critic::features(const Vector& state) const {
  const Vector x = input(state);
  Vector f(1 + 2 * x.size());
  f << 1.0, x, x.cwiseProduct(x);
  return f;
}

double Critic::value(const Vector& state) const {
  switch (flavor_) {
    case CriticFlavor::tabular: {
      const auto s = static_cast<Index>(state(0));
      if (s < 0 || s >= params_.size()) throw std::out_of_range("Critic: state index out of range");
      return params_(s);
    }
    case CriticFlavor::linear: return params_.dot(features(state));
    case CriticFlavor::mlp: return net_.forward(input(state))(0);
  }
  return 0.0;
}

Vector Critic::values(const Matrix& states) const {
  Vector v(states.rows());
  for (Index t = 0; t < states.rows(); ++t) v(t) = value(states.row(t).transpose());
  return v;
}

double Critic::loss(const Matrix& states, const Vector& targets) const {
  if (states.rows() == 0) return 0.0;
  return (values(states) - targets).squaredNorm() / static_cast<double>(states.rows());
}

Vector Critic::gradient(const Matrix& states, const Vector& targets, const std::vector<Index>& rows) const {
  Vector g = Vector::Zero(params_.size());
  const double scale = 2.0 / static_cast<double>(rows.size());
  for (Index t : rows) {
    const Vector s = states.row(t).transpose();
    const double err = value(s) - targets(t);
    switch (flavor_) {
      case CriticFlavor::tabular: g(static_cast<Index>(s(0))) += scale * err; break;
      case CriticFlavor::linear: g += (scale * err) * features(s); break;
      case CriticFlavor::mlp: g += net_.backward(input(s), Vector::Constant(1, scale * err)); break;
    }
  }
  return g;
}

std::vector<double> Critic::fit(const Matrix& states, const Vector& targets, double learning_rate, int epochs,
                                Rng& rng, int minibatch) {
  if (targets.size() != states.rows()) throw std::invalid_argument("Critic::fit: targets not aligned with states");
  if (epochs < 0 || !(learning_rate > 0.0)) throw std::invalid_argument("Critic::fit: bad schedule");
  std::vector<double> trace;
  const Index n = states.rows();
  if (n == 0) return trace;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (m_.size() != params_.size()) {
    m_ = Vector::Zero(params_.size());
    v_ = Vector::Zero(params_.size());
    step_ = 0;
  }
  for (int e = 0; e < epochs; ++e) {
    if (flavor_ == CriticFlavor::tabular) {
      set_params(params_ - learning_rate * gradient(states, targets, order));
    } else {
      for (Index i = n - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(std::uniform_int_distribution<Index>(0, i)(rng))]);
      const auto mb = static_cast<std::size_t>(std::max(1, minibatch));
      for (std::size_t lo = 0; lo < order.size(); lo += mb) {
        const std::vector<Index> rows(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                      order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), lo + mb)));
        const Vector g = gradient(states, targets, rows);
        ++step_;
        m_ = beta1 * m_ + (1.0 - beta1) * g;
        v_ = beta2 * v_ + (1.0 - beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
        const Vector update = (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps);
        set_params(params_ - learning_rate * update);
      }
    }
    const double l = loss(states, targets);
    if (!std::isfinite(l)) throw std::domain_error("Critic::fit: non-finite loss");
    trace.push_back(l);
  }
  return trace;
}

std::vector<double> fit_critic(Critic& critic, const RolloutBatch& batch, const Vector& targets, double learning_rate,
                               int epochs, Rng& rng) {
  return critic.fit(batch.states, targets, learning_rate, epochs, rng);
}

// --- advantage pipelines ----------------------------------------------------

namespace {

void require_critics(const RolloutBatch& batch, const std::vector<Critic>& cost_critics) {
  if (static_cast<int>(cost_critics.size()) != batch.num_costs())
    throw std::invalid_argument("advantage estimation: one critic per cost stream required");
}

// Single code path for every stream.
void stream_advantages(const RolloutBatch& batch, const Vector& signal, const Critic& critic, double offset,
                       double discount, double lambda, Eigen::Ref<Vector> adv, Eigen::Ref<Vector> targets) {
  const Vector v = critic.values(batch.states);
  const Vector v_next = critic.values(batch.next_states);
  adv = generalized_advantages(signal, v, v_next, offset, discount, lambda);
  targets = adv + v;
}

AdvantageEstimates run_streams(const RolloutBatch& batch, const Critic& reward_critic,
                               const std::vector<Critic>& cost_critics, const GainEstimates& offsets, double discount,
                               double lambda_reward, double lambda_cost) {
  require_critics(batch, cost_critics);
  const Index n = batch.size();
  const int m = batch.num_costs();
  AdvantageEstimates out;
  out.reward.resize(n);
  out.reward_targets.resize(n);
  out.costs.resize(n, m);
  out.cost_targets.resize(n, m);
  out.lambda_reward = lambda_reward;
  out.lambda_cost = lambda_cost;
  stream_advantages(batch, batch.rewards, reward_critic, offsets.reward, discount, lambda_reward, out.reward,
                    out.reward_targets);
  for (int i = 0; i < m; ++i)
    stream_advantages(batch, batch.costs.col(i), cost_critics[static_cast<std::size_t>(i)], offsets.costs(i),
                      discount, lambda_cost, out.costs.col(i), out.cost_targets.col(i));
  return out;
}

}  // namespace

AdvantageEstimates average_gae(const RolloutBatch& batch, const Critic& reward_critic,
                               const std::vector<Critic>& cost_critics, const GainEstimates& gains,
                               double lambda_reward, double lambda_cost) {
  AdvantageEstimates out = run_streams(batch, reward_critic, cost_critics, gains, 1.0, lambda_reward, lambda_cost);
  out.gains = gains;
  return out;
}

AdvantageEstimates discounted_gae(const RolloutBatch& batch, const Critic& reward_critic,
                                  const std::vector<Critic>& cost_critics, double gamma, double lambda_reward,
                                  double lambda_cost) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discounted_gae: gamma outside (0, 1)");
  const GainEstimates zero{0.0, Vector::Zero(batch.num_costs())};
  AdvantageEstimates out = run_streams(batch, reward_critic, cost_critics, zero, gamma, lambda_reward, lambda_cost);
  out.gains = estimate_gains(batch);
  return out;
}

}  // namespace acpo
