#pragma once

// Triplet-loss evaluation and online semi-hard negative mining.
//
// Embeddings are the rows of a B x D matrix and must be unit-norm; distances
// are Euclidean and therefore lie in [0, 2].

#include "morphgate/types.hpp"

#include <span>
#include <vector>

namespace morphgate::mining {

inline constexpr double kDefaultMargin = 0.2;
inline constexpr double kUnitNormTolerance = 1e-6;

enum class Band { Easy, SemiHard, Hard };

/// Which class may act as anchor. The default lets both classes anchor.
enum class AnchorMode { AnyClass, BonaFideOnly };

std::string_view to_string(Band band);

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  double d_ap = 0.0;
  double d_an = 0.0;
  Band band = Band::Easy;
};

struct MiningResult {
  std::vector<Triplet> triplets;
  /// Set when the batch lacks a same-class pair or an opposite-class sample.
  bool degenerate = false;
};

/// Symmetric B x B distance matrix with a zero diagonal.
/// Throws std::invalid_argument if a row is not unit-norm within 1e-6.
Matrix pairwise_distances(const Matrix& embeddings);

/// max(d_ap - d_an + margin, 0); exactly zero iff classify_band() is Easy.
double triplet_loss(double d_ap, double d_an, double margin);

/// Hard: d_an <= d_ap.  SemiHard: d_ap < d_an < d_ap + margin.  Easy: otherwise.
Band classify_band(double d_ap, double d_an, double margin);

/// For every ordered same-class (anchor, positive) pair, picks the closest
/// negative inside the semi-hard band. Without one, falls back to the
/// hardest-but-easiest Hard negative (largest d_an with d_an <= d_ap); pairs
/// whose negatives are all Easy are skipped. Ties go to the lower index.
/// Output is ordered by (anchor, positive).
MiningResult mine_semihard(const Matrix& embeddings, std::span<const Label> labels,
                           double margin = kDefaultMargin, AnchorMode mode = AnchorMode::AnyClass);

/// Same miner on a precomputed distance matrix.
MiningResult mine_semihard_distances(const Matrix& distances, std::span<const Label> labels,
                                     double margin = kDefaultMargin, AnchorMode mode = AnchorMode::AnyClass);

}  // namespace morphgate::mining
