#pragma once

// Feed-forward embedding network shared by both Siamese towers.
//
// Hidden layers use ReLU; the output layer is linear and followed by L2
// normalisation, so every embedding lies on the unit sphere.

#include "morphgate/mining.hpp"
#include "morphgate/types.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace morphgate::network {

/// Dense layer; weight is (out x in).
struct Layer {
  Matrix weight;
  Vector bias;
};

struct MLPParams {
  std::vector<int> layer_dims;  // input, hidden..., embedding
  std::vector<Layer> layers;
  // Fixed affine map applied before the first layer: (x - input_shift) / input_scale.
  // Not trained; init_params sets it to the identity.
  Vector input_shift;
  Vector input_scale;

  int input_dim() const { return layer_dims.front(); }
  int embedding_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;
};

/// Same shape as MLPParams::layers.
using Gradients = std::vector<Layer>;

/// A non-finite value appeared while evaluating `layer` (0-based).
class NumericError : public std::runtime_error {
public:
  NumericError(const std::string& what, std::size_t layer);
  std::size_t layer() const noexcept { return layer_; }

private:
  std::size_t layer_;
};

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
MLPParams init_params(std::vector<int> layer_dims, std::uint64_t seed);

/// Sets the input map to per-feature mean and standard deviation of the rows
/// of `features`. Constant features keep scale 1.
void fit_input_standardisation(MLPParams& params, const Matrix& features);

/// Checks that dims chain and all parameters are finite.
void validate(const MLPParams& params);

Vector forward(const MLPParams& params, const Vector& input);

/// Embeds every row of `inputs`; returns a B x embedding_dim matrix.
Matrix embed_batch(const MLPParams& params, const Matrix& inputs);

/// Rows of `features` are samples.
struct Batch {
  Matrix features;
  std::vector<Label> labels;
};

struct LossResult {
  double loss = 0.0;
  std::size_t triplet_count = 0;
  bool degenerate = false;
};

/// Mean triplet loss over the mined triplets (0 when none were mined).
LossResult batch_loss(const MLPParams& params, const Batch& batch, double margin = mining::kDefaultMargin,
                      mining::AnchorMode mode = mining::AnchorMode::AnyClass);

struct GradientResult {
  LossResult loss;
  Gradients grads;
  std::vector<mining::Triplet> triplets;
};

/// Exact gradient of batch_loss with the mined set and the active hinge set
/// held fixed. The hinge subgradient is 0 on the boundary, and distance terms
/// with d = 0 contribute nothing.
GradientResult gradients(const MLPParams& params, const Batch& batch, double margin = mining::kDefaultMargin,
                         mining::AnchorMode mode = mining::AnchorMode::AnyClass);

/// Gradient of the mean loss over an explicit triplet set (distances are
/// recomputed from the current parameters; the stored band decides activity).
Gradients gradients_for_triplets(const MLPParams& params, const Matrix& features,
                                 std::span<const mining::Triplet> triplets);

Gradients zeros_like(const MLPParams& params);

struct AdamState {
  std::int64_t step = 0;
  Gradients first_moment;
  Gradients second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const MLPParams& params);

/// Bias-corrected Adam update in place; increments state.step.
void adam_step(MLPParams& params, const Gradients& grads, AdamState& state, double learning_rate);

}  // namespace morphgate::network
