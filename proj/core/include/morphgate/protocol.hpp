#pragma once

// Declarative experiment runner: intra-dataset, cross-dataset and
// mixed-training protocols are all the same code path with different
// ExperimentConfig values.

#include "morphgate/metrics.hpp"
#include "morphgate/scoring.hpp"
#include "morphgate/training.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace morphgate::protocol {

struct SourceFraction {
  std::string tag;
  double fraction = 1.0;  // share of the source's training split to use
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 7;
  std::vector<SourceFraction> train_sources;
  std::vector<std::string> test_sources;
  /// Share of the final training set made of bona fide samples from
  /// mix_source's training split (morphs too when mix_morphs is set).
  double mix_digital_fraction = 0.0;
  std::string mix_source;
  bool mix_morphs = false;
  /// Identity-level split applied to every dataset; the remainder is held out for testing.
  double train_split = 0.6;
  double val_split = 0.15;
  network::TrainConfig train;
  bool grid_search = true;
  int template_k = scoring::kDefaultTemplateSize;
  scoring::ScoreOptions scoring;
  /// Directory holding one <tag>/ dataset directory per source.
  std::filesystem::path data_root;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> held_out;
  std::vector<std::string> train_identities;
  std::vector<std::string> validation_identities;
  std::vector<std::string> held_out_identities;
};

/// Identity-disjoint split of sample ids. Identities are shuffled with the
/// seed; the first round(train_fraction * n) go to train, the next
/// round(val_fraction * n) to validation, the rest are held out. A morph
/// follows its lexicographically smaller parent.
SplitResult split(std::span<const Sample> samples, double train_fraction, double val_fraction, std::uint64_t seed);

using DatasetCatalog = std::map<std::string, std::vector<Sample>>;

/// Tags referenced by the config, in first-use order.
std::vector<std::string> referenced_tags(const ExperimentConfig& config);

/// Reads <data_root>/<tag> for every referenced tag; DataError if one is missing.
DatasetCatalog load_catalog(const ExperimentConfig& config);

struct DatasetResult {
  std::string tag;
  std::vector<std::string> template_ids;
  metrics::MetricReport metrics;
  std::vector<metrics::ScoreRecord> scores;
  std::map<std::string, std::vector<metrics::DetPoint>> det;  // "all" + per species
};

struct ExperimentReport {
  ExperimentConfig config;
  double learning_rate = 0.0;
  std::vector<std::pair<double, double>> grid;  // (lr, validation EER)
  std::vector<network::EpochStats> history;
  std::size_t train_bona_fide = 0;
  std::size_t train_attacks = 0;
  std::size_t train_mixed = 0;
  std::size_t validation_size = 0;
  std::vector<DatasetResult> datasets;
  metrics::MetricReport pooled;
};

/// Splits every dataset, assembles the (optionally mixed) training set,
/// trains (with grid search when enabled), builds one template per test
/// dataset from its held-out bona fide pool and scores the held-out part.
ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetCatalog& catalog);

/// Rates as percentages with two decimals; stable key order.
std::string render_report_text(const ExperimentReport& report);

/// Writes report.txt, det_<dataset>_<species>.csv and scores_<dataset>.csv.
void render_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

std::string percent(double rate);

}  // namespace morphgate::protocol
