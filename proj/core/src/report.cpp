#include "morphgate/protocol.hpp"

#include "morphgate/score_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace morphgate::protocol {
namespace {

void metric_block(std::ostringstream& out, const metrics::MetricReport& m) {
  out << "bona_fide: " << m.bona_fide_count << '\n'
      << "attacks: " << m.attack_count << '\n'
      << "eer: " << percent(m.eer) << '\n'
      << "bpcer10: " << percent(m.bpcer10) << '\n'
      << "bpcer20: " << percent(m.bpcer20) << '\n';
  for (const auto& [species, s] : m.per_species) {
    out << "species." << species << ".eer: " << percent(s.eer) << '\n'
        << "species." << species << ".bpcer10: " << percent(s.bpcer10) << '\n'
        << "species." << species << ".bpcer20: " << percent(s.bpcer20) << '\n';
  }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string percent(double rate) { return fmt::format("{:.2f}", 100.0 * rate); }

std::string render_report_text(const ExperimentReport& report) {
  const auto& c = report.config;
  std::ostringstream out;
  std::vector<std::string> train;
  for (const auto& s : c.train_sources) train.push_back(fmt::format("{}:{}", s.tag, s.fraction));

  out << "experiment: " << c.name << '\n'
      << "seed: " << c.seed << '\n'
      << "train_sources: " << join(train, ",") << '\n'
      << "test_sources: " << join(c.test_sources, ",") << '\n'
      << "mix_digital_fraction: " << percent(c.mix_digital_fraction) << '\n'
      << "mix_source: " << (c.mix_source.empty() ? "-" : c.mix_source) << '\n'
      << "split: " << fmt::format("train={} val={}", c.train_split, c.val_split) << '\n'
      << "epochs: " << c.train.epochs << '\n'
      << "batch_size: " << c.train.batch_size << '\n'
      << "margin: " << fmt::format("{}", c.train.margin) << '\n'
      << "template_k: " << c.template_k << '\n'
      << "aggregation: " << scoring::to_string(c.scoring.aggregation) << '\n'
      << "train_bona_fide: " << report.train_bona_fide << '\n'
      << "train_attacks: " << report.train_attacks << '\n'
      << "train_mixed: " << report.train_mixed << '\n'
      << "validation_samples: " << report.validation_size << '\n';
  for (const auto& [lr, eer] : report.grid) out << "grid." << fmt::format("{}", lr) << ".val_eer: " << percent(eer) << '\n';
  out << "learning_rate: " << fmt::format("{}", report.learning_rate) << '\n';
  if (!report.history.empty()) {
    const auto& last = report.history.back();
    out << "final_loss: " << fmt::format("{:.6f}", last.loss) << '\n';
    if (last.validation_eer) out << "final_val_eer: " << percent(*last.validation_eer) << '\n';
  }

  for (const auto& d : report.datasets) {
    out << "\n[dataset " << d.tag << "]\n"
        << "template: " << join(d.template_ids, " ") << '\n';
    metric_block(out, d.metrics);
    for (const auto& [species, _] : d.det) out << "det." << species << ": det_" << d.tag << '_' << species << ".csv\n";
    out << "scores: scores_" << d.tag << ".csv\n";
  }
  out << "\n[pooled]\n";
  metric_block(out, report.pooled);
  return out.str();
}

void render_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.txt");
    if (!out) throw DataError("cannot write " + (out_dir / "report.txt").string());
    out << render_report_text(report);
  }
  for (const auto& d : report.datasets) {
    metrics::write_scores(out_dir / fmt::format("scores_{}.csv", d.tag), d.scores);
    for (const auto& [species, points] : d.det)
      metrics::write_det(out_dir / fmt::format("det_{}_{}.csv", d.tag, species), points);
  }
}

}  // namespace morphgate::protocol
