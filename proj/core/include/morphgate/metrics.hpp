#pragma once

// Score-level presentation attack detection metrics (ISO/IEC 30107-3).
//
// Convention: higher score = more attack-like, and a presentation is
// classified as an attack iff score > threshold (strict). Rates are decimal
// fractions in [0, 1], each computed as an integer count divided by the
// class size, so results are exactly reproducible.
//
// All functions are pure.

#include "morphgate/types.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace morphgate::metrics {

struct ScoreRecord {
  std::string probe_id;
  Label label = Label::BonaFide;
  std::string species;  // empty for bona fide
  double score = 0.0;
};

struct DetPoint {
  double threshold = 0.0;
  double apcer = 0.0;
  double bpcer = 0.0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// EER and the two operating points reported per attack species.
struct SpeciesMetrics {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double bpcer10 = 0.0;
  double bpcer20 = 0.0;
};

struct MetricReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double bpcer10 = 0.0;
  double bpcer20 = 0.0;
  std::size_t bona_fide_count = 0;
  std::size_t attack_count = 0;
  std::map<std::string, SpeciesMetrics> per_species;
};

/// 1 if classified as an attack, 0 if bona fide.
int classify(double score, double threshold);

/// Fraction of bona fide presentations classified as attacks.
double bpcer_at(std::span<const double> bona_fide_scores, double threshold);

/// Fraction of attack presentations (of one species, or pooled) classified as bona fide.
double apcer_at(std::span<const double> attack_scores, double threshold);

/// Sentinel below the minimum, midpoints between adjacent distinct pooled
/// scores, sentinel above the maximum; strictly ascending.
std::vector<double> candidate_thresholds(std::span<const double> bona_fide_scores,
                                         std::span<const double> attack_scores);

/// Candidate threshold minimising |APCER - BPCER| (ties: smaller threshold);
/// EER is the mean of the two rates there. No interpolation.
EerResult eer(std::span<const double> bona_fide_scores, std::span<const double> attack_scores);

/// BPCER at the largest candidate threshold whose APCER <= target_apcer.
/// BPCER20 is target 0.05, BPCER10 is target 0.10.
double bpcer_at_apcer(std::span<const double> bona_fide_scores, std::span<const double> attack_scores,
                      double target_apcer);

/// One point per candidate threshold, ascending.
std::vector<DetPoint> det_curve(std::span<const double> bona_fide_scores,
                                std::span<const double> attack_scores);

SpeciesMetrics summarize(std::span<const double> bona_fide_scores, std::span<const double> attack_scores);

/// Pooled metrics over all attack scores plus one block per species.
/// Throws DataError when either class is missing.
MetricReport evaluate(std::span<const ScoreRecord> records);

/// DET curves keyed by "all" (pooled) and by species name.
std::map<std::string, std::vector<DetPoint>> det_curves_by_species(std::span<const ScoreRecord> records);

}  // namespace morphgate::metrics
