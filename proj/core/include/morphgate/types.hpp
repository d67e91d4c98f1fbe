#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace morphgate {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ground truth of a presentation. Attack means "morph" throughout the library.
enum class Label { BonaFide, Attack };

std::string_view to_string(Label label);

/// Accepts "bonafide" and "attack" (and "morph" as an alias of attack).
Label parse_label(std::string_view text);

/// Malformed or inconsistent input data (files, datasets, score sets).
/// Carries an optional 1-based line number for file-backed inputs.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A labelled feature vector standing in for a face image.
///
/// Bona fide samples keep their identity in `parent_a` and leave `parent_b`
/// and `species` empty. Morphs carry both parent identities and the name of
/// the morphing tool in `species`.
struct Sample {
  std::string sample_id;
  Vector features;
  Label label = Label::BonaFide;
  std::string species;
  std::string parent_a;
  std::string parent_b;
  std::string dataset_tag;

  /// Identity the sample belongs to for identity-disjoint splitting:
  /// the identity itself for bona fide, the lexicographically smaller parent for morphs.
  const std::string& owner_identity() const;
};

/// Throws std::invalid_argument when the label/species/parent invariants do not hold.
void validate(const Sample& sample);

/// splitmix64 finaliser; derives independent stream seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace morphgate
