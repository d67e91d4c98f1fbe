#include "morphgate/training.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace morphgate::network {
namespace {

// Endless shuffled stream over one class; reshuffles on wrap-around.
class ClassStream {
public:
  ClassStream(std::vector<std::size_t> indices, std::mt19937_64& rng) : indices_(std::move(indices)), rng_(rng) {
    std::shuffle(indices_.begin(), indices_.end(), rng_);
  }

  std::size_t size() const { return indices_.size(); }

  std::size_t next() {
    if (cursor_ == indices_.size()) {
      std::shuffle(indices_.begin(), indices_.end(), rng_);
      cursor_ = 0;
    }
    return indices_[cursor_++];
  }

private:
  std::vector<std::size_t> indices_;
  std::mt19937_64& rng_;
  std::size_t cursor_ = 0;
};

Batch gather(std::span<const Sample> dataset, const std::vector<std::size_t>& rows) {
  Batch batch;
  const auto dim = dataset.front().features.size();
  batch.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
  batch.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    batch.features.row(static_cast<Eigen::Index>(r)) = dataset[rows[r]].features.transpose();
    batch.labels.push_back(dataset[rows[r]].label);
  }
  return batch;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::span<const Sample> dataset, const TrainConfig& config,
                                                    ClassStream& bona_fide, ClassStream& attacks,
                                                    std::mt19937_64& rng) {
  const std::size_t n = dataset.size();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t count = std::max<std::size_t>(1, (n + batch_size - 1) / batch_size);
  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(count);

  if (config.balanced_batches) {
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t want = std::min(batch_size, n);
      std::size_t n_bf = std::min(want / 2, bona_fide.size());
      const std::size_t n_atk = std::min(want - n_bf, attacks.size());
      n_bf = std::min(want - n_atk, bona_fide.size());
      std::vector<std::size_t> rows;
      rows.reserve(n_bf + n_atk);
      for (std::size_t i = 0; i < n_bf; ++i) rows.push_back(bona_fide.next());
      for (std::size_t i = 0; i < n_atk; ++i) rows.push_back(attacks.next());
      batches.push_back(std::move(rows));
    }
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch_size)
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
  }
  return batches;
}

}  // namespace

TrainingDiverged::TrainingDiverged(const std::string& what, int epoch) : std::runtime_error(what), epoch_(epoch) {}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  if (embedding_dim < 1) throw std::invalid_argument("embedding_dim must be positive");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
  for (double lr : lr_grid)
    if (!(lr > 0.0)) throw std::invalid_argument("lr_grid entries must be positive");
  if (template_k < 1) throw std::invalid_argument("template_k must be positive");
}

std::vector<int> layer_dims_for(const TrainConfig& config, int input_dim) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.embedding_dim);
  return dims;
}

double validation_eer(const MLPParams& params, std::span<const Sample> validation, int template_k,
                      std::uint64_t seed) {
  const auto tmpl = scoring::build_template(validation, params, template_k, seed);
  const auto records = scoring::score_dataset(validation, params, tmpl);
  std::vector<double> bf, atk;
  for (const auto& r : records) (r.label == Label::BonaFide ? bf : atk).push_back(r.score);
  return metrics::eer(bf, atk).eer;
}

TrainResult train(std::span<const Sample> dataset, const TrainConfig& config, std::span<const Sample> validation) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("empty training set");

  std::vector<std::size_t> bf_idx, atk_idx;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (dataset[i].label == Label::BonaFide ? bf_idx : atk_idx).push_back(i);
  if (bf_idx.empty() || atk_idx.empty())
    throw std::invalid_argument("training set must contain both bona fide and morph samples");
  if (bf_idx.size() < 2 && atk_idx.size() < 2)
    throw std::invalid_argument("training set needs two samples of at least one class");

  const auto input_dim = static_cast<int>(dataset.front().features.size());
  for (const auto& s : dataset)
    if (s.features.size() != input_dim) throw std::invalid_argument("inconsistent feature dimensions");

  TrainResult result;
  result.params = init_params(layer_dims_for(config, input_dim), derive_seed(config.seed, 0));
  if (config.standardise_inputs) {
    Matrix all(static_cast<Eigen::Index>(dataset.size()), input_dim);
    for (std::size_t i = 0; i < dataset.size(); ++i) all.row(static_cast<Eigen::Index>(i)) = dataset[i].features.transpose();
    fit_input_standardisation(result.params, all);
  }
  if (config.epochs == 0) return result;

  std::mt19937_64 rng(derive_seed(config.seed, 1));
  ClassStream bona_fide(bf_idx, rng);
  ClassStream attacks(atk_idx, rng);
  AdamState adam = make_adam_state(result.params);
  const std::uint64_t template_seed = derive_seed(config.seed, 2);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = epoch_batches(dataset, config, bona_fide, attacks, rng);
    double loss_sum = 0.0;
    std::size_t mined = 0;
    for (const auto& rows : batches) {
      const auto batch = gather(dataset, rows);
      GradientResult step;
      try {
        step = gradients(result.params, batch, config.margin, config.anchor_mode);
      } catch (const NumericError& e) {
        throw TrainingDiverged(fmt::format("training diverged in epoch {}: {}", epoch, e.what()), epoch);
      }
      if (!std::isfinite(step.loss.loss))
        throw TrainingDiverged(fmt::format("training loss became non-finite in epoch {}", epoch), epoch);
      loss_sum += step.loss.loss;
      mined += step.loss.triplet_count;
      adam_step(result.params, step.grads, adam, config.learning_rate);
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(batches.size()), mined, std::nullopt};
    if (!std::isfinite(stats.loss))
      throw TrainingDiverged(fmt::format("training loss became non-finite in epoch {}", epoch), epoch);
    if (!validation.empty()) {
      try {
        stats.validation_eer = validation_eer(result.params, validation, config.template_k, template_seed);
      } catch (const NumericError& e) {
        throw TrainingDiverged(fmt::format("training diverged in epoch {}: {}", epoch, e.what()), epoch);
      }
    }
    result.history.push_back(stats);
  }
  return result;
}

GridSearchResult grid_search_lr(std::span<const Sample> dataset, std::span<const Sample> validation,
                                const TrainConfig& config) {
  if (config.lr_grid.empty()) throw std::invalid_argument("learning-rate grid is empty");
  if (validation.empty()) throw std::invalid_argument("grid search needs a validation set");

  GridSearchResult out;
  bool have_best = false;
  double best_eer = 0.0;
  for (double lr : config.lr_grid) {
    TrainConfig run = config;
    run.learning_rate = lr;
    auto trained = train(dataset, run, validation);
    const double score = trained.history.empty()
                             ? validation_eer(trained.params, validation, config.template_k,
                                              derive_seed(config.seed, 2))
                             : *trained.history.back().validation_eer;
    out.eer_by_lr.emplace_back(lr, score);
    if (!have_best || score < best_eer || (score == best_eer && lr < out.best_lr)) {
      have_best = true;
      best_eer = score;
      out.best_lr = lr;
      out.best = std::move(trained);
    }
  }
  return out;
}

}  // namespace morphgate::network
