#pragma once

// Triplet-loss training of the embedding network with Adam, plus the
// learning-rate grid search used to pick one rate per experiment.

#include "morphgate/network.hpp"
#include "morphgate/scoring.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace morphgate::network {

struct TrainConfig {
  int epochs = 250;
  int batch_size = 128;
  double learning_rate = 1e-4;
  double margin = mining::kDefaultMargin;
  std::uint64_t seed = 7;
  std::vector<double> lr_grid{1e-3, 5e-4, 1e-4, 5e-5};
  std::vector<int> hidden{64, 64};
  int embedding_dim = 32;
  bool balanced_batches = true;
  bool standardise_inputs = true;  // fit the input map on the training set
  mining::AnchorMode anchor_mode = mining::AnchorMode::AnyClass;
  /// Template used to score the validation set each epoch.
  int template_k = scoring::kDefaultTemplateSize;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  std::size_t mined = 0;
  std::optional<double> validation_eer;
};

struct TrainResult {
  MLPParams params;
  std::vector<EpochStats> history;
};

/// Raised when the training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
public:
  TrainingDiverged(const std::string& what, int epoch);
  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

/// Layer sizes for a given input dimension: input, hidden..., embedding.
std::vector<int> layer_dims_for(const TrainConfig& config, int input_dim);

/// Validation EER of `params`: template from the validation bona fide pool,
/// template sources excluded from scoring.
double validation_eer(const MLPParams& params, std::span<const Sample> validation, int template_k,
                      std::uint64_t seed);

/// Deterministic given (dataset, config). Each epoch reshuffles both classes
/// and assembles class-balanced batches (half bona fide, half morph where
/// available). With epochs == 0 the initial parameters are returned.
TrainResult train(std::span<const Sample> dataset, const TrainConfig& config,
                  std::span<const Sample> validation = {});

struct GridSearchResult {
  double best_lr = 0.0;
  /// (learning rate, final validation EER), in grid order.
  std::vector<std::pair<double, double>> eer_by_lr;
  TrainResult best;
};

/// One training run per grid point with the shared seed; lowest validation
/// EER wins, ties go to the smaller learning rate.
GridSearchResult grid_search_lr(std::span<const Sample> dataset, std::span<const Sample> validation,
                                const TrainConfig& config);

}  // namespace morphgate::network
