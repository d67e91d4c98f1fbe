#pragma once

// INI-style configuration files ("key = value" under [section] headers,
// '#' or ';' comments). Unknown sections and keys are rejected.
//
// Generation spec:
//   [dataset]  tag seed identities bonafide_per_identity dim identity_dims
//              inter_spread intra_spread alpha morph_pairs_per_tool tools
//   [tool.<name>]  amplitude smoothing      (overrides or user-defined tools)
//   [shift]    angle translation noise seed  (optional domain shift)
//
// Experiment config:
//   [experiment] name seed data_root
//   [data]       train test mix_digital_fraction mix_source mix_morphs train_split val_split
//   [training]   epochs batch_size learning_rate lr_grid grid_search margin hidden
//                embedding_dim balanced_batches standardise_inputs anchor_mode
//   [scoring]    template_k aggregation exclude_template_sources

#include "morphgate/protocol.hpp"
#include "morphgate/synth.hpp"

#include <filesystem>
#include <iosfwd>

namespace morphgate::config {

/// Throws DataError (with line numbers where available) on malformed files.
synth::GenerationSpec load_generation_spec(std::istream& in);
synth::GenerationSpec load_generation_spec(const std::filesystem::path& path);

/// A relative data_root is resolved against `base_dir`.
protocol::ExperimentConfig load_experiment_config(std::istream& in, const std::filesystem::path& base_dir);
protocol::ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace morphgate::config
