#include "morphgate/protocol.hpp"

#include "morphgate/dataset_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace morphgate::protocol {
namespace {

// Per-dataset view after the identity-level split.
struct SplitView {
  std::vector<const Sample*> train;
  std::vector<const Sample*> validation;
  std::vector<const Sample*> held_out;
};

SplitView view(const std::vector<Sample>& samples, const SplitResult& s) {
  const std::set<std::string> train(s.train.begin(), s.train.end());
  const std::set<std::string> val(s.validation.begin(), s.validation.end());
  SplitView v;
  for (const auto& sample : samples) {
    if (train.contains(sample.sample_id))
      v.train.push_back(&sample);
    else if (val.contains(sample.sample_id))
      v.validation.push_back(&sample);
    else
      v.held_out.push_back(&sample);
  }
  return v;
}

// Seeded subset of `pool` of the given size, kept in pool order.
std::vector<const Sample*> subset(const std::vector<const Sample*>& pool, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(count, idx.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<const Sample*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

std::vector<Sample> materialise(const std::vector<const Sample*>& ptrs) {
  std::vector<Sample> out;
  out.reserve(ptrs.size());
  for (const auto* p : ptrs) out.push_back(*p);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("experiment needs a name");
  if (train_sources.empty()) throw std::invalid_argument("experiment needs at least one training source");
  if (test_sources.empty()) throw std::invalid_argument("experiment needs at least one test source");
  for (const auto& s : train_sources) {
    if (s.tag.empty()) throw std::invalid_argument("empty training source tag");
    if (!(s.fraction > 0.0 && s.fraction <= 1.0))
      throw std::invalid_argument(fmt::format("fraction for '{}' must lie in (0, 1]", s.tag));
  }
  for (const auto& t : test_sources)
    if (t.empty()) throw std::invalid_argument("empty test source tag");
  if (!(mix_digital_fraction >= 0.0 && mix_digital_fraction < 1.0))
    throw std::invalid_argument("mix_digital_fraction must lie in [0, 1)");
  if (mix_digital_fraction > 0.0 && mix_source.empty())
    throw std::invalid_argument("mix_digital_fraction > 0 requires mix_source");
  if (!(train_split > 0.0 && train_split <= 1.0) || !(val_split >= 0.0) || train_split + val_split > 1.0 + 1e-12)
    throw std::invalid_argument("split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
  if (grid_search && !(val_split > 0.0)) throw std::invalid_argument("grid search needs val_split > 0");
  if (template_k < 1) throw std::invalid_argument("template_k must be positive");
  train.validate();
}

SplitResult split(std::span<const Sample> samples, double train_fraction, double val_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0) || !(val_fraction >= 0.0 && val_fraction <= 1.0) ||
      train_fraction + val_fraction > 1.0 + 1e-12)
    throw std::invalid_argument("split fractions must lie in [0, 1] and sum to at most 1");

  std::set<std::string> unique;
  for (const auto& s : samples) unique.insert(s.owner_identity());
  std::vector<std::string> identities(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  std::shuffle(identities.begin(), identities.end(), rng);

  const std::size_t n = identities.size();
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n))));
  const auto n_val =
      std::min(n - n_train, static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))));

  SplitResult out;
  out.train_identities.assign(identities.begin(), identities.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation_identities.assign(identities.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   identities.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.held_out_identities.assign(identities.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), identities.end());
  for (auto* list : {&out.train_identities, &out.validation_identities, &out.held_out_identities})
    std::sort(list->begin(), list->end());

  const std::set<std::string> train(out.train_identities.begin(), out.train_identities.end());
  const std::set<std::string> val(out.validation_identities.begin(), out.validation_identities.end());
  for (const auto& s : samples) {
    const auto& owner = s.owner_identity();
    if (train.contains(owner))
      out.train.push_back(s.sample_id);
    else if (val.contains(owner))
      out.validation.push_back(s.sample_id);
    else
      out.held_out.push_back(s.sample_id);
  }
  return out;
}

std::vector<std::string> referenced_tags(const ExperimentConfig& config) {
  std::vector<std::string> tags;
  auto add = [&](const std::string& t) {
    if (!t.empty() && std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
  };
  for (const auto& s : config.train_sources) add(s.tag);
  for (const auto& t : config.test_sources) add(t);
  if (config.mix_digital_fraction > 0.0) add(config.mix_source);
  return tags;
}

DatasetCatalog load_catalog(const ExperimentConfig& config) {
  DatasetCatalog catalog;
  for (const auto& tag : referenced_tags(config)) catalog[tag] = synth::read_dataset(config.data_root / tag).samples;
  return catalog;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetCatalog& catalog) {
  config.validate();
  for (const auto& tag : referenced_tags(config))
    if (!catalog.contains(tag)) throw DataError(fmt::format("dataset '{}' is not available", tag));

  std::map<std::string, SplitView> views;
  for (const auto& tag : referenced_tags(config)) {
    const auto& samples = catalog.at(tag);
    views[tag] = view(samples, split(samples, config.train_split, config.val_split, config.seed));
  }

  ExperimentReport report;
  report.config = config;

  // Training and validation pools.
  std::vector<const Sample*> train_ptrs, val_ptrs;
  for (std::size_t i = 0; i < config.train_sources.size(); ++i) {
    const auto& src = config.train_sources[i];
    const auto& v = views.at(src.tag);
    const auto take = static_cast<std::size_t>(std::llround(src.fraction * static_cast<double>(v.train.size())));
    const auto chosen = src.fraction < 1.0 ? subset(v.train, take, derive_seed(config.seed, 10 + i)) : v.train;
    train_ptrs.insert(train_ptrs.end(), chosen.begin(), chosen.end());
    val_ptrs.insert(val_ptrs.end(), v.validation.begin(), v.validation.end());
  }

  if (config.mix_digital_fraction > 0.0) {
    std::vector<const Sample*> pool;
    for (const auto* s : views.at(config.mix_source).train)
      if (s->label == Label::BonaFide || config.mix_morphs) pool.push_back(s);
    const double f = config.mix_digital_fraction;
    const auto needed = static_cast<std::size_t>(std::ceil(f * static_cast<double>(train_ptrs.size()) / (1.0 - f)));
    if (pool.size() < needed)
      throw DataError(fmt::format("mixing {:.0f}% needs {} samples from '{}', only {} available", 100.0 * f, needed,
                                  config.mix_source, pool.size()));
    const auto mixed = subset(pool, needed, derive_seed(config.seed, 20));
    train_ptrs.insert(train_ptrs.end(), mixed.begin(), mixed.end());
    report.train_mixed = mixed.size();
  }

  const auto train_set = materialise(train_ptrs);
  const auto val_set = materialise(val_ptrs);
  for (const auto& s : train_set) (s.label == Label::BonaFide ? report.train_bona_fide : report.train_attacks)++;
  report.validation_size = val_set.size();
  if (report.train_bona_fide == 0 || report.train_attacks == 0)
    throw DataError("training set must contain both bona fide and morph samples");

  network::TrainResult trained;
  if (config.grid_search) {
    auto search = network::grid_search_lr(train_set, val_set, config.train);
    report.learning_rate = search.best_lr;
    report.grid = std::move(search.eer_by_lr);
    trained = std::move(search.best);
  } else {
    trained = network::train(train_set, config.train, val_set);
    report.learning_rate = config.train.learning_rate;
  }
  report.history = trained.history;

  // Scoring on each held-out test pool.
  std::vector<metrics::ScoreRecord> pooled;
  for (const auto& tag : config.test_sources) {
    const auto test_set = materialise(views.at(tag).held_out);
    std::size_t bf = 0;
    for (const auto& s : test_set) bf += s.label == Label::BonaFide;
    if (bf == 0 || bf == test_set.size())
      throw DataError(fmt::format("held-out part of '{}' must contain both classes", tag));
    if (bf <= static_cast<std::size_t>(config.template_k) && config.scoring.exclude_template_sources)
      throw DataError(fmt::format("held-out part of '{}' has too few bona fide samples for a template", tag));

    DatasetResult result;
    result.tag = tag;
    const auto tmpl = scoring::build_template(test_set, trained.params, config.template_k, derive_seed(config.seed, 30));
    result.template_ids = tmpl.source_ids;
    result.scores = scoring::score_dataset(test_set, trained.params, tmpl, config.scoring);
    result.metrics = metrics::evaluate(result.scores);
    result.det = metrics::det_curves_by_species(result.scores);
    pooled.insert(pooled.end(), result.scores.begin(), result.scores.end());
    report.datasets.push_back(std::move(result));
  }
  report.pooled = metrics::evaluate(pooled);
  return report;
}

}  // namespace morphgate::protocol
