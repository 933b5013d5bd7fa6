#include "acpo/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace acpo {

Mlp::Mlp(int input_dim, std::vector<int> hidden, int output_dim) {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("Mlp: dimensions must be positive");
  sizes_.push_back(input_dim);
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("Mlp: hidden sizes must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(output_dim);
  Index offset = 0;
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    Layer l;
    l.in = sizes_[k];
    l.out = sizes_[k + 1];
    l.weight_offset = offset;
    offset += static_cast<Index>(l.in) * l.out;
    l.bias_offset = offset;
    offset += l.out;
    layers_.push_back(l);
  }
  params_ = Vector::Zero(offset);
}

void Mlp::initialize(Rng& rng, double output_scale) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    const double bound = std::sqrt(6.0 / (l.in + l.out)) * (k + 1 == layers_.size() ? output_scale : 1.0);
    for (Index i = 0; i < static_cast<Index>(l.in) * l.out; ++i)
      params_(l.weight_offset + i) = bound * (2.0 * uniform01(rng) - 1.0);
    params_.segment(l.bias_offset, l.out).setZero();
  }
}

void Mlp::set_params(const Vector& params) {
  if (params.size() != params_.size()) throw std::invalid_argument("Mlp::set_params: size mismatch");
  params_ = params;
}

std::vector<Vector> Mlp::activations(const Vector& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("Mlp: input dimension mismatch");
  std::vector<Vector> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(x);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    Vector z = weights(params_, l) * acts.back() + params_.segment(l.bias_offset, l.out);
    if (k + 1 < layers_.size()) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

Vector Mlp::forward(const Vector& x) const { return activations(x).back(); }

Vector Mlp::backward(const Vector& x, const Vector& out_grad) const {
  const std::vector<Vector> acts = activations(x);
  Vector grad = Vector::Zero(params_.size());
  Vector delta = out_grad;  // gradient w.r.t. the pre-activation of the current layer
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& l = layers_[k];
    Eigen::Map<Matrix>(grad.data() + l.weight_offset, l.out, l.in) = delta * acts[k].transpose();
    grad.segment(l.bias_offset, l.out) = delta;
    if (k > 0) {
      Vector upstream = weights(params_, l).transpose() * delta;
      delta = upstream.cwiseProduct((1.0 - acts[k].array().square()).matrix());
    }
  }
  return grad;
}

Vector Mlp::jvp(const Vector& x, const Vector& direction) const {
  if (direction.size() != params_.size()) throw std::invalid_argument("Mlp::jvp: direction size mismatch");
  const std::vector<Vector> acts = activations(x);
  Vector tangent = Vector::Zero(input_dim());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    Vector dz = weights(params_, l) * tangent + weights(direction, l) * acts[k] + direction.segment(l.bias_offset, l.out);
    if (k + 1 < layers_.size()) dz = dz.cwiseProduct((1.0 - acts[k + 1].array().square()).matrix());
    tangent = std::move(dz);
  }
  return tangent;
}

}  // namespace acpo
