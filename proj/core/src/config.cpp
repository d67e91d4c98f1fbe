#include "morphgate/config.hpp"

#include "text_util.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <set>

namespace morphgate::config {
namespace {

namespace pt = boost::property_tree;

pt::ptree parse_ini(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DataError(e.message(), e.line());
  }
  return tree;
}

// Typed, strict access to one [section].
class Section {
public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  void allow_only(std::initializer_list<std::string_view> keys) const {
    const std::set<std::string_view> allowed(keys);
    for (const auto& [key, _] : tree_)
      if (!allowed.contains(key)) throw DataError(fmt::format("unknown key '{}' in [{}]", key, name_));
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto child = tree_.get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return std::string(detail::trim(child->data()));
  }

  template <typename T>
  void read(const std::string& key, T& target) const {
    const auto raw = text(key);
    if (!raw) return;
    target = convert<T>(key, *raw);
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& target) const {
    const auto raw = text(key);
    if (!raw) return;
    target.clear();
    if (raw->empty()) return;
    for (const auto& item : detail::split(*raw, ',')) target.push_back(convert<T>(key, item));
  }

private:
  template <typename T>
  T convert(const std::string& key, const std::string& raw) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1" || raw == "yes") return true;
      if (raw == "false" || raw == "0" || raw == "no") return false;
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = detail::parse_real(raw)) return *v;
    } else {
      if (auto v = detail::parse_int<T>(raw)) return *v;
    }
    throw DataError(fmt::format("invalid value '{}' for [{}] {}", raw, name_, key));
  }

  std::string name_;
  const pt::ptree& tree_;
};

template <typename Fn>
void rethrow_as_data_error(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

}  // namespace

synth::GenerationSpec load_generation_spec(std::istream& in) {
  const auto tree = parse_ini(in);
  synth::GenerationSpec spec;
  spec.tools.clear();
  std::vector<std::string> tool_names;
  std::map<std::string, synth::ToolOperator> overrides;
  bool have_dataset = false;

  for (const auto& [name, body] : tree) {
    const Section section(name, body);
    if (name == "dataset") {
      have_dataset = true;
      section.allow_only({"tag", "seed", "identities", "bonafide_per_identity", "dim", "identity_dims", "inter_spread",
                          "intra_spread", "alpha", "morph_pairs_per_tool", "tools"});
      section.read("tag", spec.dataset_tag);
      section.read("seed", spec.seed);
      section.read("identities", spec.identities);
      section.read("bonafide_per_identity", spec.bonafide_per_identity);
      section.read("dim", spec.dim);
      section.read("identity_dims", spec.identity_dims);
      section.read("inter_spread", spec.inter_spread);
      section.read("intra_spread", spec.intra_spread);
      section.read("alpha", spec.alpha);
      section.read("morph_pairs_per_tool", spec.morph_pairs_per_tool);
      section.read_list("tools", tool_names);
    } else if (name.starts_with("tool.")) {
      section.allow_only({"amplitude", "smoothing"});
      synth::ToolOperator tool{name.substr(5), 0.0, 0.0};
      section.read("amplitude", tool.amplitude);
      section.read("smoothing", tool.smoothing);
      overrides[tool.name] = tool;
    } else if (name == "shift") {
      section.allow_only({"angle", "translation", "noise", "seed"});
      synth::ShiftSpec shift;
      section.read("angle", shift.angle);
      section.read("translation", shift.translation);
      section.read("noise", shift.noise);
      section.read("seed", shift.seed);
      spec.shift = shift;
    } else {
      throw DataError(fmt::format("unknown section [{}]", name));
    }
  }
  if (!have_dataset) throw DataError("generation spec lacks a [dataset] section");

  for (const auto& tool : tool_names) {
    if (auto it = overrides.find(tool); it != overrides.end()) {
      spec.tools.push_back(it->second);
    } else {
      rethrow_as_data_error([&] { spec.tools.push_back(synth::builtin_tool(tool)); });
    }
  }
  for (const auto& [name, _] : overrides)
    if (std::find(tool_names.begin(), tool_names.end(), name) == tool_names.end())
      throw DataError(fmt::format("[tool.{}] is not listed in tools", name));
  rethrow_as_data_error([&] { spec.validate(); });
  return spec;
}

synth::GenerationSpec load_generation_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open generation spec " + path.string());
  try {
    return load_generation_spec(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

protocol::ExperimentConfig load_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  const auto tree = parse_ini(in);
  protocol::ExperimentConfig cfg;
  std::string data_root = ".";

  for (const auto& [name, body] : tree) {
    const Section section(name, body);
    if (name == "experiment") {
      section.allow_only({"name", "seed", "data_root"});
      section.read("name", cfg.name);
      section.read("seed", cfg.seed);
      section.read("data_root", data_root);
    } else if (name == "data") {
      section.allow_only({"train", "test", "mix_digital_fraction", "mix_source", "mix_morphs", "train_split",
                          "val_split"});
      std::vector<std::string> train;
      section.read_list("train", train);
      for (const auto& entry : train) {
        const auto parts = detail::split(entry, ':');
        protocol::SourceFraction source{parts[0], 1.0};
        if (parts.size() > 2) throw DataError(fmt::format("invalid train source '{}'", entry));
        if (parts.size() == 2) {
          const auto f = detail::parse_real(parts[1]);
          if (!f) throw DataError(fmt::format("invalid fraction in train source '{}'", entry));
          source.fraction = *f;
        }
        cfg.train_sources.push_back(source);
      }
      section.read_list("test", cfg.test_sources);
      section.read("mix_digital_fraction", cfg.mix_digital_fraction);
      section.read("mix_source", cfg.mix_source);
      section.read("mix_morphs", cfg.mix_morphs);
      section.read("train_split", cfg.train_split);
      section.read("val_split", cfg.val_split);
    } else if (name == "training") {
      section.allow_only({"epochs", "batch_size", "learning_rate", "lr_grid", "grid_search", "margin", "hidden",
                          "embedding_dim", "balanced_batches", "standardise_inputs", "anchor_mode"});
      auto& t = cfg.train;
      section.read("epochs", t.epochs);
      section.read("batch_size", t.batch_size);
      section.read("learning_rate", t.learning_rate);
      section.read_list("lr_grid", t.lr_grid);
      section.read("grid_search", cfg.grid_search);
      section.read("margin", t.margin);
      section.read_list("hidden", t.hidden);
      section.read("embedding_dim", t.embedding_dim);
      section.read("balanced_batches", t.balanced_batches);
      section.read("standardise_inputs", t.standardise_inputs);
      std::string anchor = "any";
      section.read("anchor_mode", anchor);
      if (anchor == "any")
        t.anchor_mode = mining::AnchorMode::AnyClass;
      else if (anchor == "bonafide")
        t.anchor_mode = mining::AnchorMode::BonaFideOnly;
      else
        throw DataError(fmt::format("anchor_mode must be 'any' or 'bonafide', got '{}'", anchor));
    } else if (name == "scoring") {
      section.allow_only({"template_k", "aggregation", "exclude_template_sources"});
      section.read("template_k", cfg.template_k);
      std::string aggregation = "mean";
      section.read("aggregation", aggregation);
      rethrow_as_data_error([&] { cfg.scoring.aggregation = scoring::parse_aggregation(aggregation); });
      section.read("exclude_template_sources", cfg.scoring.exclude_template_sources);
    } else {
      throw DataError(fmt::format("unknown section [{}]", name));
    }
  }

  cfg.train.seed = cfg.seed;
  cfg.train.template_k = cfg.template_k;
  const std::filesystem::path root(data_root);
  cfg.data_root = root.is_absolute() ? root : base_dir / root;
  rethrow_as_data_error([&] { cfg.validate(); });
  return cfg;
}

protocol::ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open experiment config " + path.string());
  try {
    return load_experiment_config(in, path.parent_path());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace morphgate::config
