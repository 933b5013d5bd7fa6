#pragma once

#include <vector>

#include "acpo/types.hpp"

namespace acpo {

/// Fully connected network with tanh hidden layers and a linear output layer. All weights
/// and biases live in one flat parameter vector: per layer, W (out x in, column-major) then b.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, std::vector<int> hidden, int output_dim);

  /// Glorot-uniform hidden weights, output weights scaled by `output_scale`, zero biases.
  void initialize(Rng& rng, double output_scale = 0.01);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  Index num_params() const { return params_.size(); }
  const Vector& params() const { return params_; }
  void set_params(const Vector& params);
  const std::vector<int>& layer_sizes() const { return sizes_; }

  Vector forward(const Vector& x) const;

  /// d<out_grad, f(x)>/d(params).
  Vector backward(const Vector& x, const Vector& out_grad) const;

  /// Directional derivative of f(x) along a parameter direction.
  Vector jvp(const Vector& x, const Vector& direction) const;

 private:
  struct Layer {
    Index weight_offset = 0;
    Index bias_offset = 0;
    int in = 0;
    int out = 0;
  };

  Eigen::Map<const Matrix> weights(const Vector& p, const Layer& l) const {
    return {p.data() + l.weight_offset, l.out, l.in};
  }
  // Activations after each layer (index 0 is the input).
  std::vector<Vector> activations(const Vector& x) const;

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  Vector params_;
};

}  // namespace acpo
