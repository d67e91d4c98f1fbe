#include "morphgate/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace morphgate::synth {
namespace {

Vector gaussian(Eigen::Index dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * normal(rng);
  return v;
}

std::string fmt_real(double v) { return fmt::format("{}", v); }

}  // namespace

Vector ToolOperator::apply(const Vector& combined, std::uint64_t perturbation_seed) const {
  if (amplitude == 0.0) return combined;
  if (!(smoothing >= 0.0 && smoothing < 1.0))
    throw std::invalid_argument(fmt::format("tool '{}': smoothing must lie in [0, 1)", name));
  std::mt19937_64 rng(perturbation_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - smoothing * smoothing);
  Vector out = combined;
  double y = 0.0;
  for (Eigen::Index i = 0; i < combined.size(); ++i) {
    const double z = normal(rng);
    y = i == 0 ? z : smoothing * y + innovation * z;
    out(i) += amplitude * y;
  }
  return out;
}

const std::vector<std::string>& builtin_tool_names() {
  static const std::vector<std::string> names{"facefusion", "facemorpher", "opencv", "ubo", "webmorph", "stylegan"};
  return names;
}

ToolOperator builtin_tool(const std::string& name) {
  // Amplitudes order the tools by how visible their artefacts are:
  // facemorpher and opencv leave many, facefusion and ubo few, stylegan
  // produces smooth GAN-like residue.
  if (name == "facemorpher") return {name, 0.675, 0.0};
  if (name == "opencv") return {name, 0.600, 0.2};
  if (name == "webmorph") return {name, 0.480, 0.5};
  if (name == "facefusion") return {name, 0.420, 0.3};
  if (name == "ubo") return {name, 0.450, 0.6};
  if (name == "stylegan") return {name, 0.390, 0.8};
  throw std::invalid_argument(fmt::format("unknown morphing tool '{}'", name));
}

std::vector<IdentityModel> gen_identities(int n, int dim, double inter_spread, double intra_spread,
                                          std::uint64_t seed, int identity_dims, const std::string& prefix) {
  if (n < 1) throw std::invalid_argument("need at least one identity");
  if (dim < 2) throw std::invalid_argument("feature dimension must be at least 2");
  if (!(inter_spread > 0.0) || !(intra_spread > 0.0)) throw std::invalid_argument("spreads must be positive");
  if (identity_dims < 0 || identity_dims > dim) throw std::invalid_argument("identity_dims must lie in [0, dim]");
  const int active = identity_dims == 0 ? dim : identity_dims;

  std::mt19937_64 rng(seed);
  std::vector<IdentityModel> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vector mean = Vector::Zero(dim);
    mean.head(active) = gaussian(active, inter_spread, rng);
    out.push_back({fmt::format("{}-{:04d}", prefix, i), std::move(mean), intra_spread});
  }
  return out;
}

std::vector<Sample> sample_bonafide(const IdentityModel& identity, int count, std::uint64_t seed,
                                    const std::string& dataset_tag) {
  if (count < 1) throw std::invalid_argument("bona fide count must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Sample s;
    s.sample_id = fmt::format("{}/bf{}", identity.identity_id, i);
    s.features = identity.mean + gaussian(identity.mean.size(), identity.intra_spread, rng);
    s.label = Label::BonaFide;
    s.parent_a = identity.identity_id;
    s.dataset_tag = dataset_tag;
    out.push_back(std::move(s));
  }
  return out;
}

Sample morph(const Sample& a, const Sample& b, double alpha, const ToolOperator& tool,
             std::uint64_t perturbation_seed) {
  if (a.label != Label::BonaFide || b.label != Label::BonaFide)
    throw std::invalid_argument("morph parents must be bona fide");
  if (a.parent_a == b.parent_a) throw std::invalid_argument("morph parents must be different identities");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("morphing factor must lie in (0, 1)");
  if (a.features.size() != b.features.size()) throw std::invalid_argument("parent feature sizes differ");
  if (tool.name.empty()) throw std::invalid_argument("tool needs a name");

  Sample m;
  m.sample_id = fmt::format("{}:{}+{}", tool.name, a.sample_id, b.sample_id);
  m.features = tool.apply(alpha * a.features + (1.0 - alpha) * b.features, perturbation_seed);
  m.label = Label::Attack;
  m.species = tool.name;
  m.parent_a = a.parent_a;
  m.parent_b = b.parent_a;
  m.dataset_tag = a.dataset_tag;
  return m;
}

Matrix paired_rotation(int dim, double angle) {
  Matrix r = Matrix::Identity(dim, dim);
  const int half = dim / 2;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int i = 0; i < half; ++i) {
    const int j = i + half;
    r(i, i) = c;
    r(i, j) = -s;
    r(j, i) = s;
    r(j, j) = c;
  }
  return r;
}

std::vector<Sample> domain_shift(std::span<const Sample> samples, const DomainShift& shift,
                                 const std::string& new_tag) {
  const auto dim = shift.linear.rows();
  if (shift.linear.cols() != dim || shift.translation.size() != dim)
    throw std::invalid_argument("domain shift: linear part must be square and match the translation");
  if (!Eigen::FullPivLU<Matrix>(shift.linear).isInvertible())
    throw std::invalid_argument("domain shift: linear part is singular");
  if (!(shift.noise_scale >= 0.0)) throw std::invalid_argument("domain shift: noise scale must be non-negative");

  std::mt19937_64 rng(shift.seed);
  std::vector<Sample> out(samples.begin(), samples.end());
  for (auto& s : out) {
    if (s.features.size() != dim) throw std::invalid_argument("domain shift: feature dimension mismatch");
    Vector moved = shift.linear * s.features + shift.translation;
    if (shift.noise_scale > 0.0) moved += gaussian(dim, shift.noise_scale, rng);
    s.features = std::move(moved);
    s.dataset_tag = new_tag;
  }
  return out;
}

void GenerationSpec::validate() const {
  if (dataset_tag.empty() || dataset_tag.find_first_of(",/ \t") != std::string::npos)
    throw std::invalid_argument("dataset tag must be a non-empty word");
  if (identities < 1) throw std::invalid_argument("identities must be at least 1");
  if (bonafide_per_identity < 1) throw std::invalid_argument("bonafide_per_identity must be at least 1");
  if (dim < 2) throw std::invalid_argument("dim must be at least 2");
  if (identity_dims < 0 || identity_dims > dim) throw std::invalid_argument("identity_dims must lie in [0, dim]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (morph_pairs_per_tool < 0) throw std::invalid_argument("morph_pairs_per_tool must be non-negative");
  const auto n = static_cast<long long>(identities);
  if (!tools.empty() && morph_pairs_per_tool > n * (n - 1) / 2)
    throw std::invalid_argument(fmt::format("{} morph pairs per tool requested but only {} distinct identity pairs exist",
                                            morph_pairs_per_tool, n * (n - 1) / 2));
  std::set<std::string> names;
  for (const auto& t : tools) {
    if (t.name.empty() || t.name == "all" || t.name.find_first_of(",/ \t") != std::string::npos)
      throw std::invalid_argument(fmt::format("invalid tool name '{}'", t.name));
    if (!names.insert(t.name).second) throw std::invalid_argument(fmt::format("duplicate tool '{}'", t.name));
    if (!(t.amplitude >= 0.0) || !(t.smoothing >= 0.0 && t.smoothing < 1.0))
      throw std::invalid_argument(fmt::format("tool '{}' has invalid amplitude/smoothing", t.name));
  }
}

GenerationSpec desk_scale_spec() {
  GenerationSpec spec;
  for (const char* name : {"facemorpher", "opencv", "webmorph", "facefusion"}) spec.tools.push_back(builtin_tool(name));
  return spec;
}

std::size_t DatasetManifest::total() const {
  std::size_t n = bona_fide;
  for (const auto& [_, c] : attacks_by_species) n += c;
  return n;
}

DatasetManifest count_samples(const std::string& tag, std::uint64_t seed, std::span<const Sample> samples) {
  DatasetManifest m;
  m.dataset_tag = tag;
  m.seed = seed;
  for (const auto& s : samples) {
    if (s.label == Label::BonaFide)
      ++m.bona_fide;
    else
      ++m.attacks_by_species[s.species];
  }
  return m;
}

Dataset make_dataset(const GenerationSpec& spec) {
  spec.validate();
  const auto identities = gen_identities(spec.identities, spec.dim, spec.inter_spread, spec.intra_spread,
                                         derive_seed(spec.seed, 0), spec.identity_dims, spec.dataset_tag);

  Dataset ds;
  std::vector<std::vector<std::size_t>> by_identity(identities.size());
  for (std::size_t i = 0; i < identities.size(); ++i) {
    for (auto& s : sample_bonafide(identities[i], spec.bonafide_per_identity, derive_seed(spec.seed, 100 + i),
                                   spec.dataset_tag)) {
      by_identity[i].push_back(ds.samples.size());
      ds.samples.push_back(std::move(s));
    }
  }

  std::mt19937_64 rng(derive_seed(spec.seed, 1));
  const auto n = identities.size();
  const std::size_t total_pairs = n * (n - 1) / 2;
  const auto wanted = static_cast<std::size_t>(spec.morph_pairs_per_tool);
  std::uniform_int_distribution<std::size_t> pick_identity(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_sample(0, static_cast<std::size_t>(spec.bonafide_per_identity) - 1);

  for (std::size_t t = 0; t < spec.tools.size(); ++t) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (wanted * 2 > total_pairs) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      std::shuffle(pairs.begin(), pairs.end(), rng);
      pairs.resize(wanted);
    } else {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      while (pairs.size() < wanted) {
        std::size_t i = pick_identity(rng);
        std::size_t j = pick_identity(rng);
        if (i == j) continue;
        if (j < i) std::swap(i, j);
        if (seen.insert({i, j}).second) pairs.emplace_back(i, j);
      }
    }

    const std::uint64_t tool_seed = derive_seed(spec.seed, 2 + t);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& a = ds.samples[by_identity[pairs[k].first][pick_sample(rng)]];
      const auto& b = ds.samples[by_identity[pairs[k].second][pick_sample(rng)]];
      Sample m = morph(a, b, spec.alpha, spec.tools[t], derive_seed(tool_seed, k));
      m.sample_id = fmt::format("{}-{}-{:04d}", spec.dataset_tag, spec.tools[t].name, k);
      ds.samples.push_back(std::move(m));
    }
  }

  if (spec.shift) {
    DomainShift shift{paired_rotation(spec.dim, spec.shift->angle), Vector::Constant(spec.dim, spec.shift->translation),
                      spec.shift->noise, spec.shift->seed};
    ds.samples = domain_shift(ds.samples, shift, spec.dataset_tag);
  }

  ds.manifest = count_samples(spec.dataset_tag, spec.seed, ds.samples);
  auto& p = ds.manifest.parameters;
  p.emplace_back("identities", std::to_string(spec.identities));
  p.emplace_back("bonafide_per_identity", std::to_string(spec.bonafide_per_identity));
  p.emplace_back("dim", std::to_string(spec.dim));
  p.emplace_back("identity_dims", std::to_string(spec.identity_dims));
  p.emplace_back("inter_spread", fmt_real(spec.inter_spread));
  p.emplace_back("intra_spread", fmt_real(spec.intra_spread));
  p.emplace_back("alpha", fmt_real(spec.alpha));
  p.emplace_back("morph_pairs_per_tool", std::to_string(spec.morph_pairs_per_tool));
  for (const auto& t : spec.tools)
    p.emplace_back("tool." + t.name, fmt::format("amplitude={} smoothing={}", t.amplitude, t.smoothing));
  if (spec.shift) {
    p.emplace_back("shift.angle", fmt_real(spec.shift->angle));
    p.emplace_back("shift.translation", fmt_real(spec.shift->translation));
    p.emplace_back("shift.noise", fmt_real(spec.shift->noise));
    p.emplace_back("shift.seed", std::to_string(spec.shift->seed));
  }
  return ds;
}

}  // namespace morphgate::synth
