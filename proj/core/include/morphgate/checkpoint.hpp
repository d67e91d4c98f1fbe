#pragma once

// Text checkpoint for a trained embedding network:
//
//   morphgate-checkpoint 2
//   layer_dims 16 64 64 32
//   margin 0.2
//   seed 7
//   parameters <count>
//   <input_dim shift values, then input_dim scale values, one per line>
//   <one value per line: layer by layer, weight row-major then bias>
//
// `parameters` counts trainable values only.
//
// Values are written in shortest round-trip form, so load(save(p)) == p exactly.

#include "morphgate/network.hpp"

#include <filesystem>
#include <iosfwd>

namespace morphgate::network {

struct Checkpoint {
  MLPParams params;
  double margin = mining::kDefaultMargin;
  std::uint64_t seed = 0;
};

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws DataError on malformed or truncated input.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace morphgate::network
