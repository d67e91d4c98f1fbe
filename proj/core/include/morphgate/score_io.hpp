#pragma once

// File formats owned by the metrics module.
//
//   scores CSV   probe_id,label,species,score   (label: bonafide|attack)
//   DET CSV      threshold,apcer,bpcer
//   report       "key: value" lines, rates as decimal fractions

#include "morphgate/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace morphgate::metrics {

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

/// Throws DataError (with the 1-based line number) on malformed input.
std::vector<ScoreRecord> read_scores(std::istream& in);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records);
void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records);

void write_det(std::ostream& out, const std::vector<DetPoint>& points);
void write_det(const std::filesystem::path& path, const std::vector<DetPoint>& points);

/// Decimal key-value report with one block per species.
void write_report(std::ostream& out, const MetricReport& report);

}  // namespace morphgate::metrics
