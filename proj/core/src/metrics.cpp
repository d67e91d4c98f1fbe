#include "morphgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace morphgate::metrics {
namespace {

void require_finite(std::span<const double> scores) {
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
}

void require_bona_fide(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("no bona fide presentations");
  require_finite(scores);
}

void require_attacks(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("no attack presentations");
  require_finite(scores);
}

double ratio(std::size_t count, std::size_t total) {
  return static_cast<double>(count) / static_cast<double>(total);
}

std::vector<double> sorted_copy(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  std::sort(out.begin(), out.end());
  return out;
}

struct CountPoint {
  double threshold;
  std::size_t attacks_accepted;    // attack score <= threshold
  std::size_t bona_fide_rejected;  // bona fide score > threshold
};

// Error counts at every candidate threshold, from sorted class scores.
std::vector<CountPoint> sweep_counts(std::span<const double> bona_fide, std::span<const double> attacks) {
  const auto bf = sorted_copy(bona_fide);
  const auto atk = sorted_copy(attacks);
  const auto thresholds = candidate_thresholds(bona_fide, attacks);

  std::vector<CountPoint> points;
  points.reserve(thresholds.size());
  auto bf_it = bf.begin();
  auto atk_it = atk.begin();
  for (double t : thresholds) {
    // thresholds ascend, so both cursors only move forward
    while (bf_it != bf.end() && *bf_it <= t) ++bf_it;
    while (atk_it != atk.end() && *atk_it <= t) ++atk_it;
    points.push_back({t, static_cast<std::size_t>(atk_it - atk.begin()), static_cast<std::size_t>(bf.end() - bf_it)});
  }
  return points;
}

// Ratios of exact counts, so they equal apcer_at/bpcer_at bitwise.
std::vector<DetPoint> sweep(std::span<const double> bona_fide, std::span<const double> attacks) {
  std::vector<DetPoint> points;
  for (const auto& c : sweep_counts(bona_fide, attacks))
    points.push_back({c.threshold, ratio(c.attacks_accepted, attacks.size()),
                      ratio(c.bona_fide_rejected, bona_fide.size())});
  return points;
}

}  // namespace

int classify(double score, double threshold) {
  if (!std::isfinite(score) || !std::isfinite(threshold))
    throw std::invalid_argument("classify: non-finite score or threshold");
  return score > threshold ? 1 : 0;
}

double bpcer_at(std::span<const double> bona_fide_scores, double threshold) {
  require_bona_fide(bona_fide_scores);
  std::size_t attacks = 0;
  for (double s : bona_fide_scores) attacks += static_cast<std::size_t>(classify(s, threshold));
  return ratio(attacks, bona_fide_scores.size());
}

double apcer_at(std::span<const double> attack_scores, double threshold) {
  require_attacks(attack_scores);
  std::size_t missed = 0;
  for (double s : attack_scores) missed += static_cast<std::size_t>(1 - classify(s, threshold));
  return ratio(missed, attack_scores.size());
}

std::vector<double> candidate_thresholds(std::span<const double> bona_fide_scores,
                                         std::span<const double> attack_scores) {
  require_bona_fide(bona_fide_scores);
  require_attacks(attack_scores);

  std::vector<double> pooled;
  pooled.reserve(bona_fide_scores.size() + attack_scores.size());
  pooled.insert(pooled.end(), bona_fide_scores.begin(), bona_fide_scores.end());
  pooled.insert(pooled.end(), attack_scores.begin(), attack_scores.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds;
  thresholds.reserve(pooled.size() + 1);
  thresholds.push_back(std::min(pooled.front() - 1.0, std::nextafter(pooled.front(), -inf)));
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    const double mid = std::midpoint(pooled[i], pooled[i + 1]);
    if (mid > thresholds.back()) thresholds.push_back(mid);
  }
  thresholds.push_back(std::max(pooled.back() + 1.0, std::nextafter(pooled.back(), inf)));
  return thresholds;
}

EerResult eer(std::span<const double> bona_fide_scores, std::span<const double> attack_scores) {
  const auto points = sweep_counts(bona_fide_scores, attack_scores);
  // |a/Na - b/Nb| compared as |a*Nb - b*Na| so equal gaps tie exactly.
  const std::uint64_t n_atk = attack_scores.size();
  const std::uint64_t n_bf = bona_fide_scores.size();
  auto gap = [&](const CountPoint& p) {
    const std::uint64_t x = p.attacks_accepted * n_bf;
    const std::uint64_t y = p.bona_fide_rejected * n_atk;
    return x > y ? x - y : y - x;
  };
  const CountPoint* best = &points.front();
  std::uint64_t best_gap = gap(*best);
  for (const auto& p : points) {
    const auto g = gap(p);
    if (g < best_gap) {
      best_gap = g;
      best = &p;
    }
  }
  const double apcer = ratio(best->attacks_accepted, attack_scores.size());
  const double bpcer = ratio(best->bona_fide_rejected, bona_fide_scores.size());
  return {(apcer + bpcer) / 2.0, best->threshold};
}

double bpcer_at_apcer(std::span<const double> bona_fide_scores, std::span<const double> attack_scores,
                      double target_apcer) {
  if (!(target_apcer > 0.0 && target_apcer < 1.0))
    throw std::invalid_argument("bpcer_at_apcer: target APCER must lie in (0, 1)");
  const auto points = sweep(bona_fide_scores, attack_scores);

  const DetPoint* feasible = nullptr;
  for (const auto& p : points)
    if (p.apcer <= target_apcer) feasible = &p;  // keep the largest threshold
  if (feasible != nullptr) return feasible->bpcer;

  // Unreachable with the low sentinel in the candidate set (APCER = 0 there),
  // kept for completeness of the contract.
  const DetPoint* fallback = &points.front();
  for (const auto& p : points) {
    if (p.apcer < fallback->apcer || (p.apcer == fallback->apcer && p.bpcer < fallback->bpcer)) fallback = &p;
  }
  return fallback->bpcer;
}

std::vector<DetPoint> det_curve(std::span<const double> bona_fide_scores,
                                std::span<const double> attack_scores) {
  return sweep(bona_fide_scores, attack_scores);
}

SpeciesMetrics summarize(std::span<const double> bona_fide_scores, std::span<const double> attack_scores) {
  const auto e = eer(bona_fide_scores, attack_scores);
  return {e.eer, e.threshold, bpcer_at_apcer(bona_fide_scores, attack_scores, 0.10),
          bpcer_at_apcer(bona_fide_scores, attack_scores, 0.05)};
}

namespace {

struct Partition {
  std::vector<double> bona_fide;
  std::vector<double> attacks;
  std::map<std::string, std::vector<double>> by_species;
};

Partition partition(std::span<const ScoreRecord> records) {
  Partition p;
  for (const auto& r : records) {
    if (!std::isfinite(r.score)) throw DataError("score for '" + r.probe_id + "' is not finite");
    if (r.label == Label::BonaFide) {
      if (!r.species.empty()) throw DataError("bona fide record '" + r.probe_id + "' carries a species");
      p.bona_fide.push_back(r.score);
    } else {
      if (r.species.empty()) throw DataError("attack record '" + r.probe_id + "' has no species");
      p.attacks.push_back(r.score);
      p.by_species[r.species].push_back(r.score);
    }
  }
  if (p.bona_fide.empty()) throw DataError("no bona fide presentations");
  if (p.attacks.empty()) throw DataError("no attack presentations");
  return p;
}

}  // namespace

MetricReport evaluate(std::span<const ScoreRecord> records) {
  const auto p = partition(records);
  const auto pooled = summarize(p.bona_fide, p.attacks);
  MetricReport report;
  report.eer = pooled.eer;
  report.eer_threshold = pooled.eer_threshold;
  report.bpcer10 = pooled.bpcer10;
  report.bpcer20 = pooled.bpcer20;
  report.bona_fide_count = p.bona_fide.size();
  report.attack_count = p.attacks.size();
  for (const auto& [species, scores] : p.by_species) report.per_species[species] = summarize(p.bona_fide, scores);
  return report;
}

std::map<std::string, std::vector<DetPoint>> det_curves_by_species(std::span<const ScoreRecord> records) {
  const auto p = partition(records);
  std::map<std::string, std::vector<DetPoint>> curves;
  curves["all"] = det_curve(p.bona_fide, p.attacks);
  for (const auto& [species, scores] : p.by_species) curves[species] = det_curve(p.bona_fide, scores);
  return curves;
}

}  // namespace morphgate::metrics
