#include "morphgate/network.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace morphgate::network {
namespace {

struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; columns are samples
  std::vector<Matrix> pre;     // pre-activations of layer l
  Matrix embeddings;           // D x B, unit columns
  Vector norms;                // |z_L| per sample
};

void require_finite(const Matrix& m, std::size_t layer, const char* what) {
  if (!m.allFinite()) throw NumericError(fmt::format("non-finite {} in layer {}", what, layer), layer);
}

ForwardCache forward_cache(const MLPParams& params, const Matrix& inputs) {
  if (inputs.cols() != params.input_dim())
    throw std::invalid_argument(
        fmt::format("input has {} features, network expects {}", inputs.cols(), params.input_dim()));
  ForwardCache cache;
  const std::size_t depth = params.layers.size();
  Matrix a = ((inputs.rowwise() - params.input_shift.transpose()).array().rowwise() /
              params.input_scale.transpose().array())
                 .matrix()
                 .transpose();
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& layer = params.layers[l];
    Matrix z = (layer.weight * a).colwise() + layer.bias;
    require_finite(z, l, "activation");
    cache.inputs.push_back(std::move(a));
    if (l + 1 < depth) a = z.cwiseMax(0.0);
    cache.pre.push_back(std::move(z));
  }
  const Matrix& out = cache.pre.back();
  cache.norms = out.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < cache.norms.size(); ++i)
    if (!(cache.norms(i) > 0.0)) throw NumericError("zero-length embedding before normalisation", depth - 1);
  cache.embeddings = out.array().rowwise() / cache.norms.transpose().array();
  return cache;
}

Gradients backward(const MLPParams& params, const ForwardCache& cache, const Matrix& embedding_grads) {
  const std::size_t depth = params.layers.size();
  Gradients grads(depth);

  // d/dz of z/|z| applied to g: (g - e (e.g)) / |z|
  const Eigen::RowVectorXd along = (cache.embeddings.array() * embedding_grads.array()).colwise().sum();
  Matrix delta = embedding_grads - cache.embeddings * along.asDiagonal();
  delta = delta * cache.norms.cwiseInverse().asDiagonal();

  for (std::size_t l = depth; l-- > 0;) {
    require_finite(delta, l, "gradient");
    grads[l].weight = delta * cache.inputs[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix upstream = params.layers[l].weight.transpose() * delta;
      delta = upstream.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

}  // namespace

NumericError::NumericError(const std::string& what, std::size_t layer) : std::runtime_error(what), layer_(layer) {}

std::size_t MLPParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

MLPParams init_params(std::vector<int> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw std::invalid_argument("network needs at least an input and an output size");
  for (int d : layer_dims)
    if (d < 1) throw std::invalid_argument("layer sizes must be positive");

  MLPParams params;
  params.layer_dims = std::move(layer_dims);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < params.layer_dims.size(); ++l) {
    const int fan_in = params.layer_dims[l];
    const int fan_out = params.layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    params.layers.push_back(std::move(layer));
  }
  params.input_shift = Vector::Zero(params.input_dim());
  params.input_scale = Vector::Ones(params.input_dim());
  return params;
}

void fit_input_standardisation(MLPParams& params, const Matrix& features) {
  if (features.cols() != params.input_dim())
    throw std::invalid_argument(
        fmt::format("input has {} features, network expects {}", features.cols(), params.input_dim()));
  if (features.rows() == 0) throw std::invalid_argument("cannot fit standardisation on no samples");
  const Vector mean = features.colwise().mean().transpose();
  Vector scale(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    const double var = (features.col(j).array() - mean(j)).square().mean();
    const double sd = std::sqrt(var);
    scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  params.input_shift = mean;
  params.input_scale = scale;
}

void validate(const MLPParams& params) {
  if (params.layer_dims.size() != params.layers.size() + 1)
    throw std::invalid_argument("layer_dims and layers disagree");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != params.layer_dims[l + 1] || layer.weight.cols() != params.layer_dims[l] ||
        layer.bias.size() != params.layer_dims[l + 1])
      throw std::invalid_argument(fmt::format("layer {} has inconsistent shape", l));
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw NumericError(fmt::format("non-finite parameter in layer {}", l), l);
  }
  if (params.input_shift.size() != params.input_dim() || params.input_scale.size() != params.input_dim())
    throw std::invalid_argument("input map has the wrong size");
  if (!params.input_shift.allFinite() || !params.input_scale.allFinite() || (params.input_scale.array() <= 0.0).any())
    throw std::invalid_argument("input map must be finite with positive scale");
}

Vector forward(const MLPParams& params, const Vector& input) {
  if (input.size() != params.input_dim())
    throw std::invalid_argument(
        fmt::format("input has {} features, network expects {}", input.size(), params.input_dim()));
  return forward_cache(params, input.transpose()).embeddings.col(0);
}

Matrix embed_batch(const MLPParams& params, const Matrix& inputs) {
  return forward_cache(params, inputs).embeddings.transpose();
}

LossResult batch_loss(const MLPParams& params, const Batch& batch, double margin, mining::AnchorMode mode) {
  const Matrix emb = embed_batch(params, batch.features);
  const auto mined = mining::mine_semihard(emb, batch.labels, margin, mode);
  LossResult result;
  result.degenerate = mined.degenerate;
  result.triplet_count = mined.triplets.size();
  if (mined.triplets.empty()) return result;
  double total = 0.0;
  for (const auto& t : mined.triplets) total += mining::triplet_loss(t.d_ap, t.d_an, margin);
  result.loss = total / static_cast<double>(mined.triplets.size());
  return result;
}

Gradients gradients_for_triplets(const MLPParams& params, const Matrix& features,
                                 std::span<const mining::Triplet> triplets) {
  if (triplets.empty()) return zeros_like(params);
  const auto cache = forward_cache(params, features);
  const Matrix& e = cache.embeddings;
  Matrix g = Matrix::Zero(e.rows(), e.cols());
  const double scale = 1.0 / static_cast<double>(triplets.size());

  for (const auto& t : triplets) {
    if (t.band == mining::Band::Easy) continue;
    const auto a = static_cast<Eigen::Index>(t.anchor);
    const auto p = static_cast<Eigen::Index>(t.positive);
    const auto n = static_cast<Eigen::Index>(t.negative);
    const Vector ap = e.col(a) - e.col(p);
    const Vector an = e.col(a) - e.col(n);
    const double d_ap = ap.norm();
    const double d_an = an.norm();
    if (d_ap > 0.0) {
      g.col(a) += scale / d_ap * ap;
      g.col(p) -= scale / d_ap * ap;
    }
    if (d_an > 0.0) {
      g.col(a) -= scale / d_an * an;
      g.col(n) += scale / d_an * an;
    }
  }
  return backward(params, cache, g);
}

GradientResult gradients(const MLPParams& params, const Batch& batch, double margin, mining::AnchorMode mode) {
  const Matrix emb = embed_batch(params, batch.features);
  auto mined = mining::mine_semihard(emb, batch.labels, margin, mode);

  GradientResult result;
  result.loss.degenerate = mined.degenerate;
  result.loss.triplet_count = mined.triplets.size();
  if (!mined.triplets.empty()) {
    double total = 0.0;
    for (const auto& t : mined.triplets) total += mining::triplet_loss(t.d_ap, t.d_an, margin);
    result.loss.loss = total / static_cast<double>(mined.triplets.size());
  }
  result.grads = gradients_for_triplets(params, batch.features, mined.triplets);
  result.triplets = std::move(mined.triplets);
  return result;
}

Gradients zeros_like(const MLPParams& params) {
  Gradients g;
  g.reserve(params.layers.size());
  for (const auto& l : params.layers)
    g.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return g;
}

AdamState make_adam_state(const MLPParams& params) {
  AdamState state;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

void adam_step(MLPParams& params, const Gradients& grads, AdamState& state, double learning_rate) {
  const std::size_t depth = params.layers.size();
  if (grads.size() != depth || state.first_moment.size() != depth || state.second_moment.size() != depth)
    throw std::invalid_argument("adam_step: gradient/state layer count mismatch");
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& p = params.layers[l];
    for (const Gradients* g : std::initializer_list<const Gradients*>{&grads, &state.first_moment, &state.second_moment}) {
      const auto& gl = (*g)[l];
      if (gl.weight.rows() != p.weight.rows() || gl.weight.cols() != p.weight.cols() ||
          gl.bias.size() != p.bias.size())
        throw std::invalid_argument(fmt::format("adam_step: shape mismatch in layer {}", l));
    }
  }

  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < depth; ++l) {
    update(params.layers[l].weight, grads[l].weight, state.first_moment[l].weight, state.second_moment[l].weight);
    update(params.layers[l].bias, grads[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

}  // namespace morphgate::network
