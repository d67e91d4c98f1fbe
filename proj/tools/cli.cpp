#include "cli.hpp"

#include "morphgate/checkpoint.hpp"
#include "morphgate/config.hpp"
#include "morphgate/dataset_io.hpp"
#include "morphgate/protocol.hpp"
#include "morphgate/score_io.hpp"
#include "morphgate/scoring.hpp"
#include "morphgate/training.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

namespace morphgate::cli {
namespace {

namespace fs = std::filesystem;

// Usage problems that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv("MORPHGATE_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError(fmt::format("MORPHGATE_SEED must be an unsigned integer, got '{}'", text));
  return seed;
}

void print_metrics(std::ostream& out, const metrics::MetricReport& m) {
  out << "bona_fide: " << m.bona_fide_count << '\n'
      << "attacks: " << m.attack_count << '\n'
      << "eer: " << protocol::percent(m.eer) << '\n'
      << "eer_threshold: " << metrics::format_real(m.eer_threshold) << '\n'
      << "bpcer10: " << protocol::percent(m.bpcer10) << '\n'
      << "bpcer20: " << protocol::percent(m.bpcer20) << '\n';
  for (const auto& [species, s] : m.per_species) {
    out << "species." << species << ".eer: " << protocol::percent(s.eer) << '\n'
        << "species." << species << ".bpcer10: " << protocol::percent(s.bpcer10) << '\n'
        << "species." << species << ".bpcer20: " << protocol::percent(s.bpcer20) << '\n';
  }
}

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  synth::GenerationSpec spec;
  try {
    spec = config::load_generation_spec(fs::path(a.spec));
  } catch (const DataError& e) {
    err << "error: bad generation spec: " << e.what() << '\n';
    return kExitUsage;
  }
  if (a.seed) spec.seed = *a.seed;
  if (auto env = seed_override()) spec.seed = *env;
  const auto ds = synth::make_dataset(spec);
  synth::write_dataset(a.out, ds);
  out << "dataset_tag: " << ds.manifest.dataset_tag << '\n'
      << "seed: " << ds.manifest.seed << '\n'
      << "bona_fide: " << ds.manifest.bona_fide << '\n';
  for (const auto& [species, n] : ds.manifest.attacks_by_species) out << "attack." << species << ": " << n << '\n';
  out << "total: " << ds.manifest.total() << '\n' << "out: " << a.out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::string history;
  network::TrainConfig config;
  std::vector<double> lr_grid;
  bool grid = false;
  double train_split = 0.8;
  double val_split = 0.2;
};

int cmd_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  if (auto env = seed_override()) a.config.seed = *env;
  const auto ds = synth::read_dataset(a.data);
  const auto parts = protocol::split(ds.samples, a.train_split, a.val_split, a.config.seed);
  std::vector<Sample> train_set, val_set;
  const std::set<std::string> train_ids(parts.train.begin(), parts.train.end());
  const std::set<std::string> val_ids(parts.validation.begin(), parts.validation.end());
  for (const auto& s : ds.samples) {
    if (train_ids.contains(s.sample_id)) train_set.push_back(s);
    if (val_ids.contains(s.sample_id)) val_set.push_back(s);
  }

  network::TrainResult trained;
  double lr = a.config.learning_rate;
  if (a.grid || !a.lr_grid.empty()) {
    if (!a.lr_grid.empty()) a.config.lr_grid = a.lr_grid;
    auto search = network::grid_search_lr(train_set, val_set, a.config);
    for (const auto& [grid_lr, eer] : search.eer_by_lr)
      out << "grid." << metrics::format_real(grid_lr) << ".val_eer: " << protocol::percent(eer) << '\n';
    lr = search.best_lr;
    trained = std::move(search.best);
  } else {
    trained = network::train(train_set, a.config, val_set);
  }

  network::save_checkpoint(fs::path(a.out), {trained.params, a.config.margin, a.config.seed});
  if (!a.history.empty()) {
    std::ofstream h(a.history);
    if (!h) throw DataError("cannot write " + a.history);
    h << "epoch,loss,mined,val_eer\n";
    for (const auto& e : trained.history)
      h << e.epoch << ',' << metrics::format_real(e.loss) << ',' << e.mined << ','
        << (e.validation_eer ? metrics::format_real(*e.validation_eer) : "") << '\n';
  }
  for (const auto& e : trained.history)
    err << fmt::format("epoch {:4d} loss {:.6f} mined {:6d}{}\n", e.epoch, e.loss, e.mined,
                       e.validation_eer ? fmt::format(" val_eer {:.2f}%", 100.0 * *e.validation_eer) : "");
  out << "train_samples: " << train_set.size() << '\n'
      << "validation_samples: " << val_set.size() << '\n'
      << "learning_rate: " << metrics::format_real(lr) << '\n'
      << "epochs: " << trained.history.size() << '\n';
  if (!trained.history.empty()) {
    out << "final_loss: " << fmt::format("{:.6f}", trained.history.back().loss) << '\n';
    if (trained.history.back().validation_eer)
      out << "final_val_eer: " << protocol::percent(*trained.history.back().validation_eer) << '\n';
  }
  out << "model: " << a.out << '\n';
  return kExitOk;
}

struct ScoreArgs {
  std::string model;
  std::string data;
  std::string out;
  int k = scoring::kDefaultTemplateSize;
  std::uint64_t seed = 7;
  std::string aggregation = "mean";
  bool include_template_sources = false;
};

int cmd_score(ScoreArgs a, std::ostream& out, std::ostream&) {
  if (auto env = seed_override()) a.seed = *env;
  const auto cp = network::load_checkpoint(fs::path(a.model));
  const auto ds = synth::read_dataset(a.data);
  if (!ds.samples.empty() && ds.samples.front().features.size() != cp.params.input_dim())
    throw DataError(fmt::format("dataset has {} features, model expects {}", ds.samples.front().features.size(),
                                cp.params.input_dim()));
  scoring::Template tmpl;
  try {
    tmpl = scoring::build_template(ds.samples, cp.params, a.k, a.seed);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  scoring::ScoreOptions options{scoring::parse_aggregation(a.aggregation), !a.include_template_sources};
  const auto records = scoring::score_dataset(ds.samples, cp.params, tmpl, options);
  metrics::write_scores(fs::path(a.out), records);
  out << "scored: " << records.size() << '\n' << "template:";
  for (const auto& id : tmpl.source_ids) out << ' ' << id;
  out << '\n' << "out: " << a.out << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& scores, const std::string& report_path, std::ostream& out) {
  const auto records = metrics::read_scores(fs::path(scores));
  const auto report = metrics::evaluate(records);
  print_metrics(out, report);
  if (!report_path.empty()) {
    std::ofstream r(report_path);
    if (!r) throw DataError("cannot write " + report_path);
    metrics::write_report(r, report);
  }
  return kExitOk;
}

int cmd_det(const std::string& scores, const std::string& out_dir, std::ostream& out) {
  const auto records = metrics::read_scores(fs::path(scores));
  const auto curves = metrics::det_curves_by_species(records);
  fs::create_directories(out_dir);
  for (const auto& [species, points] : curves) {
    const auto path = fs::path(out_dir) / fmt::format("det_{}.csv", species);
    metrics::write_det(path, points);
    out << "det." << species << ": " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, const std::string& data_root,
                   std::ostream& out) {
  auto cfg = config::load_experiment_config(fs::path(config_path));
  if (!data_root.empty()) cfg.data_root = data_root;
  if (auto env = seed_override()) {
    cfg.seed = *env;
    cfg.train.seed = *env;
  }
  const auto catalog = protocol::load_catalog(cfg);
  const auto report = protocol::run_experiment(cfg, catalog);
  protocol::render_report(report, out_dir);
  out << protocol::render_report_text(report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"morphgate: single-image morphing attack detection with a triplet-loss Siamese network"};
  app.name("morphgate");
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a generation spec");
  synth->add_option("--spec", synth_args.spec, "Generation spec (INI)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_args.out, "Output dataset directory")->required();
  synth->add_option("--seed", synth_args.seed, "Override the spec seed");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train an embedding network on a dataset directory");
  train->add_option("--data", train_args.data, "Dataset directory")->required();
  train->add_option("--out", train_args.out, "Checkpoint file to write")->required();
  train->add_option("--history", train_args.history, "Per-epoch CSV to write");
  train->add_option("--epochs", train_args.config.epochs)->capture_default_str();
  train->add_option("--batch-size", train_args.config.batch_size)->capture_default_str();
  train->add_option("--lr", train_args.config.learning_rate)->capture_default_str();
  train->add_option("--lr-grid", train_args.lr_grid, "Learning rates to search (implies --grid)")->delimiter(',');
  train->add_flag("--grid", train_args.grid, "Select the learning rate by grid search on the validation split");
  train->add_option("--margin", train_args.config.margin)->capture_default_str();
  train->add_option("--seed", train_args.config.seed)->capture_default_str();
  train->add_option("--hidden", train_args.config.hidden, "Hidden layer sizes")->delimiter(',')->capture_default_str();
  train->add_option("--embedding-dim", train_args.config.embedding_dim)->capture_default_str();
  train->add_option("--template-k", train_args.config.template_k)->capture_default_str();
  train->add_option("--train-split", train_args.train_split)->capture_default_str();
  train->add_option("--val-split", train_args.val_split)->capture_default_str();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score a dataset against a bona fide template");
  score->add_option("--model", score_args.model, "Checkpoint file")->required();
  score->add_option("--data", score_args.data, "Dataset directory")->required();
  score->add_option("--out", score_args.out, "Score CSV to write")->required();
  score->add_option("--k", score_args.k, "Template size")->capture_default_str()->check(CLI::PositiveNumber);
  score->add_option("--seed", score_args.seed)->capture_default_str();
  score->add_option("--aggregation", score_args.aggregation)->check(CLI::IsMember({"mean", "min"}))->capture_default_str();
  score->add_flag("--include-template-sources", score_args.include_template_sources);

  std::string scores_path, report_path;
  auto* eval = app.add_subcommand("eval", "Compute EER/BPCER10/BPCER20 from a score CSV");
  eval->add_option("--scores", scores_path, "Score CSV")->required();
  eval->add_option("--report", report_path, "Also write a decimal key-value report");

  std::string det_scores, det_out;
  auto* det = app.add_subcommand("det", "Write DET curve CSVs (pooled and per species)");
  det->add_option("--scores", det_scores, "Score CSV")->required();
  det->add_option("--out", det_out, "Output directory")->required();

  std::string exp_config, exp_out, exp_root;
  auto* experiment = app.add_subcommand("experiment", "Run a full train/test protocol from a config file");
  experiment->add_option("--config", exp_config, "Experiment config (INI)")->required();
  experiment->add_option("--out", exp_out, "Report directory")->required();
  experiment->add_option("--data-root", exp_root, "Override the config's data_root");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_args, out, err);
    if (*train) return cmd_train(train_args, out, err);
    if (*score) return cmd_score(score_args, out, err);
    if (*eval) return cmd_eval(scores_path, report_path, out);
    if (*det) return cmd_det(det_scores, det_out, out);
    if (*experiment) return cmd_experiment(exp_config, exp_out, exp_root, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace morphgate::cli
