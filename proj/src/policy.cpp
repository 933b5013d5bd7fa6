#include "acpo/policy.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace acpo {

std::string to_string(PolicyFlavor flavor) {
  return flavor == PolicyFlavor::tabular_softmax ? "tabular-softmax" : "gaussian-mlp";
}

namespace {

void write_vector(std::ostream& out, const Vector& v) {
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
  out << '\n';
}

Vector read_vector(std::istream& in, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    std::string token;
    if (!(in >> token)) throw std::invalid_argument("read_policy: truncated parameter list");
    v(i) = std::stod(token);
  }
  return v;
}

void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want) throw std::invalid_argument("read_policy: expected '" + want + "'");
}

}  // namespace

// --- tabular softmax --------------------------------------------------------

TabularSoftmaxPolicy::TabularSoftmaxPolicy(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
  if (num_states < 1 || num_actions < 1) throw std::invalid_argument("TabularSoftmaxPolicy: empty shape");
  logits_ = Vector::Zero(static_cast<Index>(num_states) * num_actions);
}

TabularSoftmaxPolicy TabularSoftmaxPolicy::from_logits(int num_states, int num_actions, const Vector& logits) {
  TabularSoftmaxPolicy p(num_states, num_actions);
  p.set_params(logits);
  return p;
}

void TabularSoftmaxPolicy::set_params(const Vector& params) {
  if (params.size() != logits_.size()) throw std::invalid_argument("TabularSoftmaxPolicy: parameter size mismatch");
  if (!params.allFinite()) throw std::domain_error("TabularSoftmaxPolicy: non-finite parameters");
  logits_ = params;
}

int TabularSoftmaxPolicy::index_of(const Vector& state) const {
  const auto s = static_cast<int>(state(0));
  if (s < 0 || s >= num_states_) throw std::out_of_range("TabularSoftmaxPolicy: state index out of range");
  return s;
}

Vector TabularSoftmaxPolicy::probabilities(int state) const {
  return softmax(logits_.segment(static_cast<Index>(state) * num_actions_, num_actions_));
}

Matrix TabularSoftmaxPolicy::policy_matrix() const {
  Matrix pi(num_states_, num_actions_);
  for (int s = 0; s < num_states_; ++s) pi.row(s) = probabilities(s).transpose();
  return pi;
}

double TabularSoftmaxPolicy::log_prob(const Vector& state, const Vector& action) const {
  const int s = index_of(state);
  const auto a = static_cast<Index>(action(0));
  const auto block = logits_.segment(static_cast<Index>(s) * num_actions_, num_actions_);
  const double top = block.maxCoeff();
  return block(a) - top - std::log((block.array() - top).exp().sum());
}

Vector TabularSoftmaxPolicy::grad_log_prob(const Vector& state, const Vector& action) const {
  const int s = index_of(state);
  Vector g = Vector::Zero(logits_.size());
  auto block = g.segment(static_cast<Index>(s) * num_actions_, num_actions_);
  block = -probabilities(s);
  block(static_cast<Index>(action(0))) += 1.0;
  return g;
}

Vector TabularSoftmaxPolicy::sample(const Vector& state, Rng& rng) const {
  return Vector::Constant(1, static_cast<double>(sample_categorical(probabilities(index_of(state)), rng)));
}

Vector TabularSoftmaxPolicy::mode(const Vector& state) const {
  Index best = 0;
  probabilities(index_of(state)).maxCoeff(&best);
  return Vector::Constant(1, static_cast<double>(best));
}

double TabularSoftmaxPolicy::kl(const Policy& other, const Vector& state) const {
  const auto* o = dynamic_cast<const TabularSoftmaxPolicy*>(&other);
  if (!o || o->num_states_ != num_states_ || o->num_actions_ != num_actions_)
    throw std::invalid_argument("kl: policies differ in flavor or shape");
  const int s = index_of(state);
  return categorical_kl(probabilities(s), o->probabilities(s));
}

Vector TabularSoftmaxPolicy::mean_fisher_vector_product(const Matrix& states, const Vector& v) const {
  if (v.size() != logits_.size()) throw std::invalid_argument("fisher product: vector size mismatch");
  Vector counts = Vector::Zero(num_states_);
  for (Index t = 0; t < states.rows(); ++t) counts(index_of(states.row(t).transpose())) += 1.0;
  Vector out = Vector::Zero(v.size());
  if (states.rows() == 0) return out;
  counts /= static_cast<double>(states.rows());
  for (int s = 0; s < num_states_; ++s) {
    if (counts(s) == 0.0) continue;
    const Vector p = probabilities(s);
    const auto vs = v.segment(static_cast<Index>(s) * num_actions_, num_actions_);
    out.segment(static_cast<Index>(s) * num_actions_, num_actions_) =
        counts(s) * (p.cwiseProduct(vs) - p * p.dot(vs));
  }
  return out;
}

void TabularSoftmaxPolicy::write(std::ostream& out) const {
  out << "policy tabular-softmax\nshape " << num_states_ << ' ' << num_actions_ << "\nparams " << logits_.size() << '\n';
  write_vector(out, logits_);
}

// --- Gaussian MLP -----------------------------------------------------------

GaussianMlpPolicy::GaussianMlpPolicy(int state_dim, int action_dim, std::vector<int> hidden, double initial_log_std,
                                     Rng& rng)
    : action_dim_(action_dim), net_(state_dim, std::move(hidden), action_dim) {
  net_.initialize(rng);
  params_.resize(net_.num_params() + action_dim);
  params_ << net_.params(), Vector::Constant(action_dim, initial_log_std);
}

GaussianMlpPolicy::GaussianMlpPolicy(Mlp mean_net, Vector log_std)
    : action_dim_(static_cast<int>(log_std.size())), net_(std::move(mean_net)) {
  if (net_.output_dim() != action_dim_) throw std::invalid_argument("GaussianMlpPolicy: log-std size mismatch");
  params_.resize(net_.num_params() + action_dim_);
  params_ << net_.params(), log_std;
}

void GaussianMlpPolicy::set_params(const Vector& params) {
  if (params.size() != params_.size()) throw std::invalid_argument("GaussianMlpPolicy: parameter size mismatch");
  if (!params.allFinite()) throw std::domain_error("GaussianMlpPolicy: non-finite parameters");
  params_ = params;
  net_.set_params(params.head(net_.num_params()));
}

void GaussianMlpPolicy::set_observation_normalizer(const Vector& mean, const Vector& std) {
  if (mean.size() != net_.input_dim() || std.size() != net_.input_dim() || (std.array() <= 0.0).any())
    throw std::invalid_argument("GaussianMlpPolicy: bad observation normalizer");
  obs_mean_ = mean;
  obs_std_ = std;
}

Vector GaussianMlpPolicy::normalize(const Vector& state) const {
  if (obs_mean_.size() == 0) return state;
  return (state - obs_mean_).cwiseQuotient(obs_std_);
}

Vector GaussianMlpPolicy::mean(const Vector& state) const { return net_.forward(normalize(state)); }

double GaussianMlpPolicy::log_prob(const Vector& state, const Vector& action) const {
  const Vector ls = log_std();
  const Vector z = (action - mean(state)).cwiseQuotient(ls.array().exp().matrix());
  return -0.5 * z.squaredNorm() - ls.sum() - 0.5 * action_dim_ * std::log(2.0 * std::numbers::pi);
}

Vector GaussianMlpPolicy::grad_log_prob(const Vector& state, const Vector& action) const {
  const Vector x = normalize(state);
  const Vector ls = log_std();
  const Vector var = (2.0 * ls).array().exp();
  const Vector diff = action - net_.forward(x);
  Vector g(params_.size());
  g.head(net_.num_params()) = net_.backward(x, diff.cwiseQuotient(var));
  g.tail(action_dim_) = (diff.array().square() / var.array() - 1.0).matrix();
  return g;
}

Vector GaussianMlpPolicy::sample(const Vector& state, Rng& rng) const {
  Vector a = mean(state);
  const Vector sd = log_std().array().exp();
  for (int j = 0; j < action_dim_; ++j) a(j) += sd(j) * standard_normal(rng);
  return a;
}

double GaussianMlpPolicy::kl(const Policy& other, const Vector& state) const {
  const auto* o = dynamic_cast<const GaussianMlpPolicy*>(&other);
  if (!o || o->params_.size() != params_.size() || o->action_dim_ != action_dim_)
    throw std::invalid_argument("kl: policies differ in flavor or shape");
  const Vector ls_n = log_std(), ls_o = o->log_std();
  const Vector var_n = (2.0 * ls_n).array().exp(), var_o = (2.0 * ls_o).array().exp();
  const Vector dm = mean(state) - o->mean(state);
  return (ls_o - ls_n).sum() + ((var_n.array() + dm.array().square()) / (2.0 * var_o.array())).sum() -
         0.5 * action_dim_;
}

Vector GaussianMlpPolicy::mean_fisher_vector_product(const Matrix& states, const Vector& v) const {
  if (v.size() != params_.size()) throw std::invalid_argument("fisher product: vector size mismatch");
  const Index d_net = net_.num_params();
  const Vector inv_var = (-2.0 * log_std()).array().exp();
  const Vector v_net = v.head(d_net);
  Vector out = Vector::Zero(v.size());
  for (Index t = 0; t < states.rows(); ++t) {
    const Vector x = normalize(states.row(t).transpose());
    out.head(d_net) += net_.backward(x, net_.jvp(x, v_net).cwiseProduct(inv_var));
  }
  if (states.rows() > 0) out.head(d_net) /= static_cast<double>(states.rows());
  out.tail(action_dim_) = 2.0 * v.tail(action_dim_);
  return out;
}

void GaussianMlpPolicy::write(std::ostream& out) const {
  const auto& sizes = net_.layer_sizes();
  out << "policy gaussian-mlp\nshape " << sizes.front() << ' ' << sizes.back() << ' ' << sizes.size() - 2;
  for (std::size_t k = 1; k + 1 < sizes.size(); ++k) out << ' ' << sizes[k];
  out << "\nnormalizer " << (obs_mean_.size() ? 1 : 0) << '\n';
  if (obs_mean_.size()) {
    write_vector(out, obs_mean_);
    write_vector(out, obs_std_);
  }
  out << "params " << params_.size() << '\n';
  write_vector(out, params_);
}

std::unique_ptr<Policy> read_policy(std::istream& in) {
  expect_token(in, "policy");
  std::string flavor;
  in >> flavor;
  expect_token(in, "shape");
  if (flavor == "tabular-softmax") {
    int ns = 0, na = 0;
    in >> ns >> na;
    Index d = 0;
    expect_token(in, "params");
    in >> d;
    auto p = std::make_unique<TabularSoftmaxPolicy>(ns, na);
    p->set_params(read_vector(in, d));
    return p;
  }
  if (flavor == "gaussian-mlp") {
    int in_dim = 0, out_dim = 0, layers = 0;
    in >> in_dim >> out_dim >> layers;
    std::vector<int> hidden(static_cast<std::size_t>(layers));
    for (int& h : hidden) in >> h;
    expect_token(in, "normalizer");
    int has_norm = 0;
    in >> has_norm;
    Vector mean, sd;
    if (has_norm) {
      mean = read_vector(in, in_dim);
      sd = read_vector(in, in_dim);
    }
    expect_token(in, "params");
    Index d = 0;
    in >> d;
    const Vector params = read_vector(in, d);
    Mlp net(in_dim, hidden, out_dim);
    if (net.num_params() + out_dim != d) throw std::invalid_argument("read_policy: parameter count mismatch");
    auto p = std::make_unique<GaussianMlpPolicy>(net, params.tail(out_dim));
    p->set_params(params);
    if (has_norm) p->set_observation_normalizer(mean, sd);
    return p;
  }
  throw std::invalid_argument("read_policy: unknown flavor " + flavor);
}

// --- free functions ---------------------------------------------------------

double mean_kl(const Policy& new_policy, const Policy& old_policy, const Matrix& states) {
  if (new_policy.flavor() != old_policy.flavor() || new_policy.num_params() != old_policy.num_params())
    throw std::invalid_argument("mean_kl: policies differ in flavor or dimension");
  if (states.rows() == 0) return 0.0;
  double acc = 0.0;
  for (Index t = 0; t < states.rows(); ++t) acc += new_policy.kl(old_policy, states.row(t).transpose());
  return acc / static_cast<double>(states.rows());
}

Vector surrogate_gradient(const Policy& policy, const Matrix& states, const Matrix& actions, const Vector& advantages,
                          const Vector& weights) {
  const Index n = states.rows();
  if (actions.rows() != n || advantages.size() != n || (weights.size() != 0 && weights.size() != n))
    throw std::invalid_argument("surrogate_gradient: batch dimension mismatch");
  Vector g = Vector::Zero(policy.num_params());
  if (n == 0) return g;
  for (Index t = 0; t < n; ++t) {
    const double w = weights.size() ? weights(t) : 1.0;
    if (advantages(t) == 0.0 || w == 0.0) continue;
    g += (w * advantages(t)) * policy.grad_log_prob(states.row(t).transpose(), actions.row(t).transpose());
  }
  return weights.size() ? g : Vector(g / static_cast<double>(n));
}

double surrogate_value(const Policy& policy, const Matrix& states, const Matrix& actions, const Vector& old_log_probs,
                       const Vector& advantages) {
  const Index n = states.rows();
  if (actions.rows() != n || advantages.size() != n || old_log_probs.size() != n)
    throw std::invalid_argument("surrogate_value: batch dimension mismatch");
  double acc = 0.0;
  for (Index t = 0; t < n; ++t)
    acc += std::exp(policy.log_prob(states.row(t).transpose(), actions.row(t).transpose()) - old_log_probs(t)) *
           advantages(t);
  return n ? acc / static_cast<double>(n) : 0.0;
}

Vector kl_hessian_vector_product(const Policy& policy, const Matrix& states, const Vector& v, double damping) {
  return policy.mean_fisher_vector_product(states, v) + damping * v;
}

LinearOperator<double> make_kl_hessian_operator(const Policy& policy, const Matrix& states, double damping) {
  std::shared_ptr<const Policy> frozen = policy.clone();
  return {policy.num_params(), [frozen, states, damping](const Vector& v) {
            return kl_hessian_vector_product(*frozen, states, v, damping);
          }};
}

}  // namespace acpo
