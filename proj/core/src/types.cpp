#include "morphgate/types.hpp"

#include <fmt/format.h>

namespace morphgate {

std::string_view to_string(Label label) {
  return label == Label::BonaFide ? "bonafide" : "attack";
}

Label parse_label(std::string_view text) {
  if (text == "bonafide") return Label::BonaFide;
  if (text == "attack" || text == "morph") return Label::Attack;
  throw DataError(fmt::format("unknown label '{}'", text));
}

DataError::DataError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what : fmt::format("line {}: {}", line, what)), line_(line) {}

const std::string& Sample::owner_identity() const {
  if (label == Label::Attack && !parent_b.empty() && parent_b < parent_a) return parent_b;
  return parent_a;
}

void validate(const Sample& sample) {
  if (sample.features.size() == 0 || !sample.features.allFinite())
    throw std::invalid_argument(fmt::format("sample '{}' has empty or non-finite features", sample.sample_id));
  if (sample.label == Label::Attack) {
    if (sample.species.empty() || sample.parent_a.empty() || sample.parent_b.empty())
      throw std::invalid_argument(
          fmt::format("morph '{}' needs a species and two parent identities", sample.sample_id));
  } else {
    if (!sample.species.empty() || sample.parent_a.empty() || !sample.parent_b.empty())
      throw std::invalid_argument(
          fmt::format("bona fide '{}' needs exactly one identity and no species", sample.sample_id));
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace morphgate
