#include "doctest.h"
#include "helpers.hpp"

#include "morphgate/config.hpp"
#include "morphgate/dataset_io.hpp"
#include "morphgate/synth.hpp"

#include <set>
#include <sstream>

using namespace morphgate;
using namespace morphgate::synth;

namespace {

Sample bona_fide(const std::string& identity, Vector features) {
  return {identity + "/bf0", std::move(features), Label::BonaFide, "", identity, "", "t"};
}

GenerationSpec tiny_spec() {
  GenerationSpec s;
  s.dataset_tag = "tiny";
  s.identities = 12;
  s.bonafide_per_identity = 3;
  s.dim = 6;
  s.identity_dims = 3;
  s.morph_pairs_per_tool = 20;
  s.tools = {builtin_tool("opencv"), builtin_tool("ubo")};
  s.seed = 5;
  return s;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("a morph with the identity operator is the weighted combination") {
  Vector a(2), b(2);
  a << 0.0, 0.0;
  b << 2.0, 2.0;
  const ToolOperator none{"identity", 0.0, 0.0};
  const auto m = morph(bona_fide("x", a), bona_fide("y", b), 0.5, none, 1);
  CHECK(m.features(0) == 1.0);
  CHECK(m.features(1) == 1.0);
  CHECK(m.label == Label::Attack);
  CHECK(m.species == "identity");
  CHECK(m.parent_a == "x");
  CHECK(m.parent_b == "y");
  CHECK_NOTHROW(validate(m));

  const auto skew = morph(bona_fide("x", a), bona_fide("y", b), 0.25, none, 1);
  CHECK(skew.features(0) == 1.5);
  CHECK_THROWS_AS(morph(bona_fide("x", a), bona_fide("x", b), 0.5, none, 1), std::invalid_argument);
  CHECK_THROWS_AS(morph(bona_fide("x", a), bona_fide("y", b), 1.0, none, 1), std::invalid_argument);
}

TEST_CASE("tool perturbation has the configured scale and correlation") {
  const ToolOperator tool{"t", 0.5, 0.6};
  const Vector zero = Vector::Zero(4000);
  const Vector y = tool.apply(zero, 17) / 0.5;
  const double var = y.squaredNorm() / static_cast<double>(y.size());
  CHECK(var == doctest::Approx(1.0).epsilon(0.08));
  double lag1 = 0.0;
  for (Eigen::Index i = 1; i < y.size(); ++i) lag1 += y(i) * y(i - 1);
  lag1 /= static_cast<double>(y.size() - 1);
  CHECK(lag1 == doctest::Approx(0.6).epsilon(0.15));
  CHECK(tool.apply(zero, 17) == tool.apply(zero, 17));
  CHECK(tool.apply(zero, 17) != tool.apply(zero, 18));
}

TEST_CASE("built-in tools") {
  const auto& names = builtin_tool_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) {
    const auto t = builtin_tool(n);
    CHECK(t.name == n);
    CHECK(t.amplitude > 0.0);
  }
  CHECK_THROWS_AS(builtin_tool("photoshop"), std::invalid_argument);
}

TEST_CASE("identities and bona fide samples") {
  const auto ids = gen_identities(50, 8, 1.0, 0.1, 3, 5, "p");
  REQUIRE(ids.size() == 50);
  CHECK(ids[7].identity_id == "p-0007");
  for (const auto& id : ids) CHECK(id.mean.tail(3).isZero());
  const auto bf = sample_bonafide(ids[0], 200, 9, "tag");
  CHECK(bf.size() == 200);
  CHECK(bf[3].sample_id == "p-0000/bf3");
  double spread = 0.0;
  for (const auto& s : bf) spread += (s.features - ids[0].mean).squaredNorm();
  CHECK(std::sqrt(spread / (200 * 8)) == doctest::Approx(0.1).epsilon(0.1));
  CHECK_THROWS_AS(gen_identities(5, 8, 1.0, 0.1, 3, 9), std::invalid_argument);
}

TEST_CASE("domain shift") {
  const Matrix r = paired_rotation(6, 0.3);
  CHECK((r.transpose() * r - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(r(0, 3) == -std::sin(0.3));
  CHECK(r(1, 1) == std::cos(0.3));

  std::vector<Sample> s{bona_fide("x", Vector::Ones(6))};
  const DomainShift shift{r, Vector::Constant(6, 0.5), 0.0, 1};
  const auto moved = domain_shift(s, shift, "digital");
  CHECK(moved[0].dataset_tag == "digital");
  CHECK(moved[0].features.isApprox(r * Vector::Ones(6) + Vector::Constant(6, 0.5)));
  CHECK_THROWS_AS(domain_shift(s, {Matrix::Zero(6, 6), Vector::Zero(6), 0.0, 1}, "d"), std::invalid_argument);
  CHECK_THROWS_AS(domain_shift(s, {Matrix::Identity(5, 5), Vector::Zero(5), 0.0, 1}, "d"), std::invalid_argument);
}

TEST_CASE("generated datasets are reproducible and well formed") {
  const auto spec = tiny_spec();
  const auto a = make_dataset(spec);
  const auto b = make_dataset(spec);
  REQUIRE(a.samples.size() == 12 * 3 + 2 * 20);
  CHECK(a.manifest.bona_fide == 36);
  CHECK(a.manifest.attacks_by_species.at("ubo") == 20);
  CHECK(a.manifest.total() == a.samples.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].sample_id == b.samples[i].sample_id);
    CHECK(a.samples[i].features == b.samples[i].features);
    CHECK_NOTHROW(validate(a.samples[i]));
    ids.insert(a.samples[i].sample_id);
  }
  CHECK(ids.size() == a.samples.size());

  // morph identity pairs never repeat within a tool
  std::map<std::string, std::set<std::pair<std::string, std::string>>> pairs;
  for (const auto& s : a.samples)
    if (s.label == Label::Attack) {
      CHECK(s.parent_a != s.parent_b);
      const auto key = std::minmax(s.parent_a, s.parent_b);
      CHECK(pairs[s.species].insert({key.first, key.second}).second);
    }

  auto other = spec;
  other.seed = 6;
  CHECK(make_dataset(other).samples[0].features != a.samples[0].features);
}

TEST_CASE("dense pair requests enumerate every pair") {
  auto spec = tiny_spec();
  spec.morph_pairs_per_tool = 66;  // all C(12, 2)
  CHECK(make_dataset(spec).manifest.attacks_by_species.at("opencv") == 66);
  spec.morph_pairs_per_tool = 67;
  CHECK_THROWS_AS(make_dataset(spec), std::invalid_argument);
}

TEST_CASE("spec validation") {
  auto spec = tiny_spec();
  spec.alpha = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.tools.push_back(builtin_tool("opencv"));
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.tools[0].name = "all";
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  const auto desk = desk_scale_spec();
  CHECK(desk.identities == 200);
  CHECK(desk.dim == 16);
  CHECK(desk.tools.size() == 4);
  CHECK(desk.seed == 7);
}

TEST_CASE("sample invariants") {
  Sample s = bona_fide("x", Vector::Ones(2));
  CHECK_NOTHROW(validate(s));
  s.species = "opencv";
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  CHECK(parse_label("morph") == Label::Attack);
  CHECK(to_string(Label::BonaFide) == "bonafide");
  CHECK_THROWS_AS(parse_label("face"), DataError);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

}  // TEST_SUITE

TEST_SUITE("dataset_io") {

TEST_CASE("datasets round-trip through a directory") {
  testing_util::TempDir dir("morphgate-ds");
  const auto ds = make_dataset(tiny_spec());
  write_dataset(dir.path() / "tiny", ds);
  const auto back = read_dataset(dir.path() / "tiny");
  CHECK(back.manifest == ds.manifest);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].sample_id == ds.samples[i].sample_id);
    CHECK(back.samples[i].features == ds.samples[i].features);
    CHECK(back.samples[i].label == ds.samples[i].label);
    CHECK(back.samples[i].species == ds.samples[i].species);
    CHECK(back.samples[i].parent_b == ds.samples[i].parent_b);
  }
}

TEST_CASE("inconsistent dataset directories are rejected") {
  testing_util::TempDir dir("morphgate-ds");
  CHECK_THROWS_AS(read_dataset(dir.path() / "missing"), DataError);

  const auto ds = make_dataset(tiny_spec());
  write_dataset(dir.path() / "tiny", ds);
  auto manifest = testing_util::slurp(dir.path() / "tiny" / "manifest.txt");
  const auto pos = manifest.find("count.bonafide = 36");
  REQUIRE(pos != std::string::npos);
  manifest.replace(pos, 19, "count.bonafide = 35");
  std::ofstream(dir.path() / "tiny" / "manifest.txt") << manifest;
  CHECK_THROWS_AS(read_dataset(dir.path() / "tiny"), DataError);
}

TEST_CASE("malformed sample rows carry line numbers") {
  std::ostringstream out;
  const auto ds = make_dataset(tiny_spec());
  write_samples(out, std::span(ds.samples).subspan(0, 3));
  std::string text = out.str();
  text.replace(text.rfind(','), 1, ",x");
  std::istringstream in(text);
  try {
    read_samples(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 4);
  }
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("shipped generation specs load") {
  const std::filesystem::path dir(MORPHGATE_CONFIG_DIR);
  const auto a = config::load_generation_spec(dir / "datasets" / "synthA.ini");
  CHECK(a.dataset_tag == "synthA");
  CHECK(a.identities == 200);
  CHECK(a.dim == 16);
  CHECK(a.tools.size() == 4);
  CHECK(a.seed == 7);
  CHECK_FALSE(a.shift.has_value());
  const auto b = config::load_generation_spec(dir / "datasets" / "digitalB.ini");
  REQUIRE(b.shift.has_value());
  CHECK(b.shift->angle > 0.0);
}

TEST_CASE("generation spec overrides and errors") {
  std::istringstream ok("[dataset]\ntag = x\ntools = opencv, mytool\n; comment\n[tool.mytool]\namplitude = 0.3\n"
                        "smoothing = 0.1\n[tool.opencv]\namplitude = 0.9\n");
  const auto spec = config::load_generation_spec(ok);
  REQUIRE(spec.tools.size() == 2);
  CHECK(spec.tools[0].amplitude == 0.9);
  CHECK(spec.tools[1].name == "mytool");
  CHECK(spec.tools[1].smoothing == 0.1);

  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(config::load_generation_spec(in), DataError);
  };
  fails("[dataset]\ntag = x\ncolour = red\n");
  fails("[dataset]\ntag = x\ndim = sixteen\n");
  fails("[other]\na = 1\n");
  fails("[shift]\nangle = 1\n");
  fails("[dataset]\ntools = nosuchtool\n");
  fails("[dataset\n");
}

TEST_CASE("shipped experiment configs load") {
  const std::filesystem::path dir(MORPHGATE_CONFIG_DIR);
  for (const char* name : {"exp1", "exp2", "exp3", "exp4"}) {
    const auto cfg = config::load_experiment_config(dir / (std::string(name) + ".ini"));
    CHECK(cfg.name == name);
    CHECK(cfg.train.margin == 0.2);
    CHECK(cfg.train.epochs <= 100);
    CHECK(cfg.data_root.is_absolute());
    CHECK_NOTHROW(cfg.validate());
  }
  const auto exp4 = config::load_experiment_config(dir / "exp4.ini");
  CHECK(exp4.mix_digital_fraction == 0.2);
  CHECK(exp4.mix_source == "digitalB");
}

TEST_CASE("experiment config parsing") {
  std::istringstream in("[experiment]\nname = e\nseed = 3\ndata_root = data\n[data]\ntrain = a:0.5, b\n"
                        "test = c\n[training]\nepochs = 2\nanchor_mode = bonafide\n[scoring]\ntemplate_k = 6\n"
                        "aggregation = min\n");
  const auto cfg = config::load_experiment_config(in, "/base");
  CHECK(cfg.seed == 3);
  CHECK(cfg.train.seed == 3);
  CHECK(cfg.data_root == std::filesystem::path("/base/data"));
  REQUIRE(cfg.train_sources.size() == 2);
  CHECK(cfg.train_sources[0].fraction == 0.5);
  CHECK(cfg.train_sources[1].fraction == 1.0);
  CHECK(cfg.train.anchor_mode == mining::AnchorMode::BonaFideOnly);
  CHECK(cfg.template_k == 6);
  CHECK(cfg.scoring.aggregation == scoring::Aggregation::Min);

  std::istringstream bad("[experiment]\nname = e\n[training]\nanchor_mode = sideways\n");
  CHECK_THROWS_AS(config::load_experiment_config(bad, "/"), DataError);
}

}  // TEST_SUITE
