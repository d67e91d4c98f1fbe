#include "morphgate/mining.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace morphgate::mining {
namespace {

void check_distances(double d_ap, double d_an, double margin) {
  if (!(d_ap >= 0.0) || !(d_an >= 0.0)) throw std::invalid_argument("triplet distances must be non-negative");
  if (!(margin > 0.0) || !std::isfinite(margin)) throw std::invalid_argument("margin must be positive");
}

}  // namespace

std::string_view to_string(Band band) {
  switch (band) {
    case Band::Easy: return "easy";
    case Band::SemiHard: return "semihard";
    case Band::Hard: return "hard";
  }
  return "?";
}

Matrix pairwise_distances(const Matrix& embeddings) {
  const auto rows = embeddings.rows();
  const auto cols = embeddings.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double norm = embeddings.row(i).norm();
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance))
      throw std::invalid_argument(fmt::format("embedding row {} is not unit-norm (|x| = {})", i, norm));
  }
  Matrix d = Matrix::Zero(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = i + 1; j < rows; ++j) {
      double sq = 0.0;
      for (Eigen::Index k = 0; k < cols; ++k) {
        const double diff = embeddings(i, k) - embeddings(j, k);
        sq += diff * diff;
      }
      const double dist = std::min(std::sqrt(sq), 2.0);
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

Band classify_band(double d_ap, double d_an, double margin) {
  check_distances(d_ap, d_an, margin);
  if (d_an <= d_ap) return Band::Hard;
  // The second test keeps Easy and a zero loss equivalent under rounding.
  if (d_an >= d_ap + margin || (d_ap - d_an) + margin <= 0.0) return Band::Easy;
  return Band::SemiHard;
}

double triplet_loss(double d_ap, double d_an, double margin) {
  if (classify_band(d_ap, d_an, margin) == Band::Easy) return 0.0;
  return d_ap - d_an + margin;
}

MiningResult mine_semihard_distances(const Matrix& distances, std::span<const Label> labels, double margin,
                                     AnchorMode mode) {
  const auto n = static_cast<std::size_t>(distances.rows());
  if (distances.cols() != distances.rows() || labels.size() != n)
    throw std::invalid_argument("distance matrix and labels disagree in size");
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");

  std::size_t bona_fide = 0;
  for (auto l : labels) bona_fide += (l == Label::BonaFide);
  const std::size_t attacks = n - bona_fide;

  MiningResult result;
  const bool has_pair = bona_fide >= 2 || attacks >= 2;
  if (!has_pair || bona_fide == 0 || attacks == 0) {
    result.degenerate = true;
    return result;
  }

  for (std::size_t a = 0; a < n; ++a) {
    if (mode == AnchorMode::BonaFideOnly && labels[a] != Label::BonaFide) continue;
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      const double d_ap = distances(a, p);

      std::size_t semi = n, hard = n;
      double semi_d = 0.0, hard_d = 0.0;
      for (std::size_t neg = 0; neg < n; ++neg) {
        if (labels[neg] == labels[a]) continue;
        const double d_an = distances(a, neg);
        switch (classify_band(d_ap, d_an, margin)) {
          case Band::SemiHard:
            if (semi == n || d_an < semi_d) {
              semi = neg;
              semi_d = d_an;
            }
            break;
          case Band::Hard:
            if (hard == n || d_an > hard_d) {
              hard = neg;
              hard_d = d_an;
            }
            break;
          case Band::Easy:
            break;
        }
      }
      if (semi != n) {
        result.triplets.push_back({a, p, semi, d_ap, semi_d, Band::SemiHard});
      } else if (hard != n) {
        result.triplets.push_back({a, p, hard, d_ap, hard_d, Band::Hard});
      }
    }
  }
  return result;
}

MiningResult mine_semihard(const Matrix& embeddings, std::span<const Label> labels, double margin,
                           AnchorMode mode) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size())
    throw std::invalid_argument("embeddings and labels disagree in size");
  return mine_semihard_distances(pairwise_distances(embeddings), labels, margin, mode);
}

}  // namespace morphgate::mining
