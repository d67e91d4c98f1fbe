#include "morphgate/dataset_io.hpp"

#include "text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <istream>
#include <ostream>

namespace morphgate::synth {

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  out << "# morphgate dataset manifest\n"
      << "dataset_tag = " << manifest.dataset_tag << '\n'
      << "seed = " << manifest.seed << '\n';
  for (const auto& [key, value] : manifest.parameters) out << "param." << key << " = " << value << '\n';
  out << "total = " << manifest.total() << '\n' << "count.bonafide = " << manifest.bona_fide << '\n';
  for (const auto& [species, count] : manifest.attacks_by_species)
    out << "count.attack." << species << " = " << count << '\n';
}

DatasetManifest read_manifest(std::istream& in) {
  DatasetManifest m;
  std::optional<std::size_t> total;
  bool have_tag = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw DataError("expected 'key = value'", line_no);
    const std::string key(detail::trim(text.substr(0, eq)));
    const std::string value(detail::trim(text.substr(eq + 1)));

    auto count = [&]() {
      const auto v = detail::parse_int<std::size_t>(value);
      if (!v) throw DataError(fmt::format("invalid count '{}'", value), line_no);
      return *v;
    };
    if (key == "dataset_tag") {
      m.dataset_tag = value;
      have_tag = true;
    } else if (key == "seed") {
      const auto v = detail::parse_int<std::uint64_t>(value);
      if (!v) throw DataError(fmt::format("invalid seed '{}'", value), line_no);
      m.seed = *v;
    } else if (key == "total") {
      total = count();
    } else if (key == "count.bonafide") {
      m.bona_fide = count();
    } else if (key.starts_with("count.attack.")) {
      m.attacks_by_species[key.substr(13)] = count();
    } else if (key.starts_with("param.")) {
      m.parameters.emplace_back(key.substr(6), value);
    } else {
      throw DataError(fmt::format("unknown manifest key '{}'", key), line_no);
    }
  }
  if (!have_tag) throw DataError("manifest lacks dataset_tag");
  if (total && *total != m.total()) throw DataError("manifest total disagrees with its per-class counts");
  return m;
}

void write_samples(std::ostream& out, std::span<const Sample> samples) {
  const auto dim = samples.empty() ? 0 : samples.front().features.size();
  out << "sample_id,label,species,dataset_tag,parent_a,parent_b";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& s : samples) {
    if (s.features.size() != dim) throw std::invalid_argument("samples have inconsistent feature sizes");
    for (const auto* field : {&s.sample_id, &s.species, &s.dataset_tag, &s.parent_a, &s.parent_b})
      detail::require_csv_safe(*field);
    out << s.sample_id << ',' << to_string(s.label) << ',' << s.species << ',' << s.dataset_tag << ','
        << s.parent_a << ',' << s.parent_b;
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << fmt::format("{}", s.features(i));
    out << '\n';
  }
}

std::vector<Sample> read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty samples file", 1);
  const auto header = detail::split(detail::trim(line), ',');
  const std::vector<std::string> fixed{"sample_id", "label", "species", "dataset_tag", "parent_a", "parent_b"};
  if (header.size() < fixed.size() + 2 || !std::equal(fixed.begin(), fixed.end(), header.begin()))
    throw DataError("expected header 'sample_id,label,species,dataset_tag,parent_a,parent_b,f0,...'", 1);
  const auto dim = static_cast<Eigen::Index>(header.size() - fixed.size());
  for (Eigen::Index i = 0; i < dim; ++i)
    if (header[fixed.size() + static_cast<std::size_t>(i)] != fmt::format("f{}", i))
      throw DataError(fmt::format("feature column {} should be named f{}", i, i), 1);

  std::vector<Sample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(detail::trim(line), ',');
    if (fields.size() != header.size())
      throw DataError(fmt::format("expected {} fields, got {}", header.size(), fields.size()), line_no);
    Sample s;
    s.sample_id = fields[0];
    try {
      s.label = parse_label(fields[1]);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
    s.species = fields[2];
    s.dataset_tag = fields[3];
    s.parent_a = fields[4];
    s.parent_b = fields[5];
    s.features.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& text = fields[fixed.size() + static_cast<std::size_t>(i)];
      const auto v = detail::parse_real(text);
      if (!v || !std::isfinite(*v)) throw DataError(fmt::format("invalid feature value '{}'", text), line_no);
      s.features(i) = *v;
    }
    try {
      validate(s);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what(), line_no);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  std::ofstream samples(dir / "samples.csv");
  if (!manifest || !samples) throw DataError("cannot write dataset into " + dir.string());
  write_manifest(manifest, dataset.manifest);
  write_samples(samples, dataset.samples);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.txt");
  if (!manifest_in) throw DataError("missing manifest.txt in " + dir.string());
  std::ifstream samples_in(dir / "samples.csv");
  if (!samples_in) throw DataError("missing samples.csv in " + dir.string());

  Dataset ds;
  try {
    ds.manifest = read_manifest(manifest_in);
  } catch (const DataError& e) {
    throw DataError((dir / "manifest.txt").string() + ": " + e.what());
  }
  try {
    ds.samples = read_samples(samples_in);
  } catch (const DataError& e) {
    throw DataError((dir / "samples.csv").string() + ": " + e.what());
  }
  const auto counted = count_samples(ds.manifest.dataset_tag, ds.manifest.seed, ds.samples);
  if (counted.bona_fide != ds.manifest.bona_fide || counted.attacks_by_species != ds.manifest.attacks_by_species)
    throw DataError("manifest counts do not match samples.csv in " + dir.string());
  return ds;
}

}  // namespace morphgate::synth
