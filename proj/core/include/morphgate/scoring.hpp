#pragma once

// Siamese inference against a fixed bona fide reference template.

#include "morphgate/metrics.hpp"
#include "morphgate/network.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace morphgate::scoring {

inline constexpr int kDefaultTemplateSize = 4;

enum class Aggregation { Mean, Min };

std::string_view to_string(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view text);

/// k bona fide reference embeddings, computed once per evaluation run.
struct Template {
  std::vector<Vector> references;
  std::vector<std::string> source_ids;
  int k = kDefaultTemplateSize;
  std::uint64_t seed = 0;
};

/// Partial Fisher-Yates over [0, n): the first k positions of a seeded
/// shuffle, i.e. k distinct indices drawn uniformly without replacement.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed);

/// Draws k of the bona fide samples in `samples` (non-bona-fide entries are
/// ignored) and embeds them. Throws std::invalid_argument if fewer than k exist.
Template build_template(std::span<const Sample> samples, const network::MLPParams& params, int k,
                        std::uint64_t seed);

/// Mean (or min) Euclidean distance from a unit-norm probe to the references.
double morph_score(const Template& tmpl, const Vector& probe, Aggregation aggregation = Aggregation::Mean);

struct ScoreOptions {
  Aggregation aggregation = Aggregation::Mean;
  bool exclude_template_sources = true;
};

std::vector<metrics::ScoreRecord> score_dataset(std::span<const Sample> samples, const network::MLPParams& params,
                                                const Template& tmpl, const ScoreOptions& options = {});

}  // namespace morphgate::scoring
