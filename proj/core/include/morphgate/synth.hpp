#pragma once

// Desk-scale stand-ins for face databases.
//
// An identity is a Gaussian cluster in feature space. The leading
// `identity_dims` coordinates carry identity ("shape"); the rest carry only
// acquisition noise ("texture"). A morph combines two bona fide samples of
// different identities and then passes through a tool operator that adds
// correlated artefact noise, the feature-space analogue of blending
// artefacts. A domain shift (affine map + noise) turns a synthetic-like
// dataset into a digital-like one.

#include "morphgate/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace morphgate::synth {

struct IdentityModel {
  std::string identity_id;
  Vector mean;
  double intra_spread = 0.1;
};

/// Post-combination perturbation of one morphing tool:
/// out = combined + amplitude * y, where y is a unit-variance AR(1) sequence
/// over the coordinates, y_0 = z_0, y_i = s y_{i-1} + sqrt(1 - s^2) z_i,
/// z ~ N(0, 1) drawn from the perturbation seed and s = smoothing.
struct ToolOperator {
  std::string name;
  double amplitude = 0.0;
  double smoothing = 0.0;

  Vector apply(const Vector& combined, std::uint64_t perturbation_seed) const;
};

/// Names of the built-in operators: facefusion, facemorpher, opencv, ubo, webmorph, stylegan.
const std::vector<std::string>& builtin_tool_names();

/// Built-in operator by name; throws std::invalid_argument for unknown names.
ToolOperator builtin_tool(const std::string& name);

/// Identity means ~ N(0, inter_spread^2) on the first identity_dims
/// coordinates and 0 elsewhere. identity_dims = 0 means all coordinates.
std::vector<IdentityModel> gen_identities(int n, int dim, double inter_spread, double intra_spread,
                                          std::uint64_t seed, int identity_dims = 0,
                                          const std::string& prefix = "id");

/// features = mean + N(0, intra_spread^2) per coordinate.
std::vector<Sample> sample_bonafide(const IdentityModel& identity, int count, std::uint64_t seed,
                                    const std::string& dataset_tag = "");

/// tool.apply(alpha * a + (1 - alpha) * b). Both parents must be bona fide
/// samples of different identities; alpha must lie in (0, 1).
Sample morph(const Sample& a, const Sample& b, double alpha, const ToolOperator& tool,
             std::uint64_t perturbation_seed);

struct DomainShift {
  Matrix linear;
  Vector translation;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

/// Rotation by `angle` in each coordinate plane (i, i + dim/2), i < dim/2.
Matrix paired_rotation(int dim, double angle);

/// features' = linear * features + translation + noise_scale * N(0, 1);
/// rewrites dataset_tag. Throws std::invalid_argument for a singular linear part.
std::vector<Sample> domain_shift(std::span<const Sample> samples, const DomainShift& shift,
                                 const std::string& new_tag);

struct ShiftSpec {
  double angle = 0.0;
  double translation = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct GenerationSpec {
  std::string dataset_tag = "synthA";
  int identities = 200;
  int bonafide_per_identity = 4;
  int dim = 16;
  int identity_dims = 6;
  double inter_spread = 1.0;
  double intra_spread = 0.1;
  double alpha = 0.5;
  int morph_pairs_per_tool = 150;
  std::vector<ToolOperator> tools;
  std::uint64_t seed = 7;
  std::optional<ShiftSpec> shift;

  void validate() const;
};

/// The desk-scale default: 200 identities, dim 16, four built-in tools.
GenerationSpec desk_scale_spec();

struct DatasetManifest {
  std::string dataset_tag;
  std::uint64_t seed = 0;
  /// Generation parameters echoed as ordered key/value pairs.
  std::vector<std::pair<std::string, std::string>> parameters;
  std::size_t bona_fide = 0;
  std::map<std::string, std::size_t> attacks_by_species;

  std::size_t total() const;
  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest count_samples(const std::string& tag, std::uint64_t seed, std::span<const Sample> samples);

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> samples;
};

/// Deterministic from the spec. Morph identity pairs are distinct within each
/// tool and never pair an identity with itself.
Dataset make_dataset(const GenerationSpec& spec);

}  // namespace morphgate::synth
