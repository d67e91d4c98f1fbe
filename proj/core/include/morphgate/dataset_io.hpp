#pragma once

// Dataset directory layout:
//
//   <dir>/manifest.txt   "key = value" header, generation parameters
//                        (param.*) and per-label/species counts (count.*)
//   <dir>/samples.csv    sample_id,label,species,dataset_tag,parent_a,parent_b,f0..f{D-1}

#include "morphgate/synth.hpp"

#include <filesystem>
#include <iosfwd>

namespace morphgate::synth {

void write_manifest(std::ostream& out, const DatasetManifest& manifest);
DatasetManifest read_manifest(std::istream& in);

void write_samples(std::ostream& out, std::span<const Sample> samples);
std::vector<Sample> read_samples(std::istream& in);

/// Creates the directory if needed.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Throws DataError when files are missing, malformed, or when the manifest
/// counts disagree with the samples.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace morphgate::synth
