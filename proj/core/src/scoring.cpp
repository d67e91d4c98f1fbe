#include "morphgate/scoring.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace morphgate::scoring {

std::string_view to_string(Aggregation aggregation) { return aggregation == Aggregation::Mean ? "mean" : "min"; }

Aggregation parse_aggregation(std::string_view text) {
  if (text == "mean") return Aggregation::Mean;
  if (text == "min") return Aggregation::Min;
  throw std::invalid_argument(fmt::format("unknown aggregation '{}' (expected mean or min)", text));
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument(fmt::format("cannot draw {} of {} items", k, n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

Template build_template(std::span<const Sample> samples, const network::MLPParams& params, int k,
                        std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("template size must be at least 1");
  std::vector<const Sample*> bona_fide;
  for (const auto& s : samples)
    if (s.label == Label::BonaFide) bona_fide.push_back(&s);
  if (bona_fide.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument(
        fmt::format("template needs {} bona fide samples, only {} available", k, bona_fide.size()));

  Template tmpl;
  tmpl.k = k;
  tmpl.seed = seed;
  for (std::size_t i : sample_without_replacement(bona_fide.size(), static_cast<std::size_t>(k), seed)) {
    tmpl.source_ids.push_back(bona_fide[i]->sample_id);
    tmpl.references.push_back(network::forward(params, bona_fide[i]->features));
  }
  return tmpl;
}

double morph_score(const Template& tmpl, const Vector& probe, Aggregation aggregation) {
  if (tmpl.references.empty()) throw std::invalid_argument("empty template");
  if (!(std::abs(probe.norm() - 1.0) <= mining::kUnitNormTolerance))
    throw std::invalid_argument("probe embedding is not unit-norm");
  double total = 0.0;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& ref : tmpl.references) {
    const double d = (probe - ref).norm();
    total += d;
    nearest = std::min(nearest, d);
  }
  const double score =
      aggregation == Aggregation::Mean ? total / static_cast<double>(tmpl.references.size()) : nearest;
  return std::clamp(score, 0.0, 2.0);
}

std::vector<metrics::ScoreRecord> score_dataset(std::span<const Sample> samples, const network::MLPParams& params,
                                                const Template& tmpl, const ScoreOptions& options) {
  if (samples.empty()) throw std::invalid_argument("no samples to score");
  const std::set<std::string> excluded(tmpl.source_ids.begin(), tmpl.source_ids.end());
  std::vector<metrics::ScoreRecord> records;
  records.reserve(samples.size());
  for (const auto& s : samples) {
    if (options.exclude_template_sources && excluded.contains(s.sample_id)) continue;
    const Vector emb = network::forward(params, s.features);
    records.push_back({s.sample_id, s.label, s.species, morph_score(tmpl, emb, options.aggregation)});
  }
  return records;
}

}  // namespace morphgate::scoring
