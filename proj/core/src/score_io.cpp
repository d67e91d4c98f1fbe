#include "morphgate/score_io.hpp"

#include "text_util.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace morphgate::metrics {

std::string format_real(double value) { return fmt::format("{}", value); }

std::vector<ScoreRecord> read_scores(std::istream& in) {
  std::vector<ScoreRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty score file", 1);
  ++line_no;
  if (detail::trim(line) != "probe_id,label,species,score")
    throw DataError("expected header 'probe_id,label,species,score'", line_no);

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(detail::trim(line), ',');
    if (fields.size() != 4) throw DataError(fmt::format("expected 4 fields, got {}", fields.size()), line_no);
    ScoreRecord r;
    r.probe_id = fields[0];
    try {
      r.label = parse_label(fields[1]);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
    r.species = fields[2];
    const auto score = detail::parse_real(fields[3]);
    if (!score || !std::isfinite(*score)) throw DataError(fmt::format("invalid score '{}'", fields[3]), line_no);
    r.score = *score;
    if (r.probe_id.empty()) throw DataError("empty probe_id", line_no);
    if ((r.label == Label::Attack) == r.species.empty())
      throw DataError("species must be set for attacks and empty for bona fide", line_no);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file " + path.string());
  return read_scores(in);
}

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records) {
  out << "probe_id,label,species,score\n";
  for (const auto& r : records) {
    detail::require_csv_safe(r.probe_id);
    detail::require_csv_safe(r.species);
    out << r.probe_id << ',' << to_string(r.label) << ',' << r.species << ',' << format_real(r.score) << '\n';
  }
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_scores(out, records);
}

void write_det(std::ostream& out, const std::vector<DetPoint>& points) {
  out << "threshold,apcer,bpcer\n";
  for (const auto& p : points)
    out << format_real(p.threshold) << ',' << format_real(p.apcer) << ',' << format_real(p.bpcer) << '\n';
}

void write_det(const std::filesystem::path& path, const std::vector<DetPoint>& points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_det(out, points);
}

void write_report(std::ostream& out, const MetricReport& report) {
  out << "bona_fide_count: " << report.bona_fide_count << '\n'
      << "attack_count: " << report.attack_count << '\n'
      << "eer: " << format_real(report.eer) << '\n'
      << "eer_threshold: " << format_real(report.eer_threshold) << '\n'
      << "bpcer10: " << format_real(report.bpcer10) << '\n'
      << "bpcer20: " << format_real(report.bpcer20) << '\n';
  for (const auto& [species, m] : report.per_species) {
    out << "[species " << species << "]\n"
        << "eer: " << format_real(m.eer) << '\n'
        << "eer_threshold: " << format_real(m.eer_threshold) << '\n'
        << "bpcer10: " << format_real(m.bpcer10) << '\n'
        << "bpcer20: " << format_real(m.bpcer20) << '\n';
  }
}

}  // namespace morphgate::metrics
