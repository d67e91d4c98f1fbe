#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "morphgate/metrics.hpp"
#include "morphgate/score_io.hpp"

#include <sstream>

using namespace morphgate;
using namespace morphgate::metrics;

TEST_SUITE("metrics") {

TEST_CASE("attack decision is strict") {
  CHECK(classify(0.5, 0.5) == 0);
  CHECK(classify(std::nextafter(0.5, 1.0), 0.5) == 1);
  CHECK(classify(-3.0, 0.5) == 0);
  CHECK_THROWS_AS(classify(std::nan(""), 0.5), std::invalid_argument);
}

TEST_CASE("single-threshold rates") {
  const std::vector<double> bf{0.1, 0.2, 0.9, 0.3};
  CHECK(bpcer_at(bf, 0.5) == 0.25);
  CHECK(bpcer_at(bf, 0.9) == 0.0);
  CHECK(bpcer_at(bf, 0.0) == 1.0);
  const std::vector<double> atk{0.4, 0.6, 0.8};
  CHECK(apcer_at(atk, 0.6) == 2.0 / 3.0);  // 0.6 itself is not above the threshold
  CHECK(apcer_at(atk, 0.1) == 0.0);
  CHECK_THROWS_AS(bpcer_at(std::vector<double>{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(apcer_at(std::vector<double>{1.0, std::nan("")}, 0.5), std::invalid_argument);
}

TEST_CASE("candidate thresholds bracket and interleave the pooled scores") {
  const std::vector<double> bf{0.3, 0.1, 0.3};
  const std::vector<double> atk{0.5, 0.1};
  const auto t = candidate_thresholds(bf, atk);
  REQUIRE(t.size() == 4);
  CHECK(t[0] < 0.1);
  CHECK(t[1] == std::midpoint(0.1, 0.3));
  CHECK(t[2] == std::midpoint(0.3, 0.5));
  CHECK(t[3] > 0.5);
  CHECK(std::is_sorted(t.begin(), t.end()));
}

TEST_CASE("candidate thresholds stay strictly ascending for adjacent doubles") {
  const double x = 1.0;
  const double y = std::nextafter(x, 2.0);
  const auto t = candidate_thresholds(std::vector<double>{x}, std::vector<double>{y});
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1] < t[i]);
  const auto det = det_curve(std::vector<double>{x}, std::vector<double>{y});
  CHECK(det.front().apcer == 0.0);
  CHECK(det.back().bpcer == 0.0);
}

TEST_CASE("EER of separable and reversed score sets") {
  const std::vector<double> low{0.1, 0.2, 0.3};
  const std::vector<double> high{0.7, 0.8};
  CHECK(eer(low, high).eer == 0.0);
  const auto e = eer(low, high);
  CHECK(e.threshold > 0.3);
  CHECK(e.threshold < 0.7);
  CHECK(eer(high, low).eer == 1.0);
}

TEST_CASE("EER ties resolve to the smaller threshold") {
  // Two candidates have gap 1/2: t=1.5 (A=1/2, B=1) and t=2.5 (A=1/2, B=0).
  const auto e = eer(std::vector<double>{2.0}, std::vector<double>{1.0, 3.0});
  CHECK(e.threshold == 1.5);
  CHECK(e.eer == 0.75);
}

TEST_CASE("BPCER at a fixed APCER takes the largest feasible threshold") {
  // 10 attacks, 4 bona fide. APCER <= 0.1 allows one accepted attack.
  const std::vector<double> atk{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> bf{0.5, 1.5, 2.5, 9.5};
  CHECK(bpcer_at_apcer(bf, atk, 0.10) == 0.5);   // t = 1.75: 2.5 and 9.5 rejected
  CHECK(bpcer_at_apcer(bf, atk, 0.05) == 0.75);  // t = 0.75
  CHECK_THROWS_AS(bpcer_at_apcer(bf, atk, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bpcer_at_apcer(bf, atk, 1.0), std::invalid_argument);
}

TEST_CASE("matches the exhaustive sweep oracle") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto s = oracle::random_scores(seed, 2, 400);
    const auto ref = oracle::sweep(s.bona_fide, s.attacks);
    const auto det = det_curve(s.bona_fide, s.attacks);
    REQUIRE(det.size() == ref.size());
    for (std::size_t i = 0; i < det.size(); ++i) {
      CHECK(det[i].threshold == ref[i].threshold);
      CHECK(det[i].apcer == ref[i].rates.apcer);
      CHECK(det[i].bpcer == ref[i].rates.bpcer);
    }
    const auto e = eer(s.bona_fide, s.attacks);
    const auto oe = oracle::eer(s.bona_fide, s.attacks);
    CHECK(e.eer == oe.eer);
    CHECK(e.threshold == oe.threshold);
    CHECK(bpcer_at_apcer(s.bona_fide, s.attacks, 0.05) == oracle::bpcer_at_apcer(s.bona_fide, s.attacks, 0.05));
    CHECK(bpcer_at_apcer(s.bona_fide, s.attacks, 0.10) == oracle::bpcer_at_apcer(s.bona_fide, s.attacks, 0.10));
  }
}

TEST_CASE("DET curves are monotone and rates agree with direct evaluation") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const auto s = oracle::random_scores(seed, 2, 300);
    const auto det = det_curve(s.bona_fide, s.attacks);
    CHECK(det.front().apcer == 0.0);
    CHECK(det.front().bpcer == 1.0);
    CHECK(det.back().apcer == 1.0);
    CHECK(det.back().bpcer == 0.0);
    for (std::size_t i = 1; i < det.size(); ++i) {
      CHECK(det[i].apcer >= det[i - 1].apcer);
      CHECK(det[i].bpcer <= det[i - 1].bpcer);
    }
    for (const auto& p : det) {
      CHECK(p.apcer == apcer_at(s.attacks, p.threshold));
      CHECK(p.bpcer == bpcer_at(s.bona_fide, p.threshold));
    }
  }
}

TEST_CASE("EER is invariant under increasing affine maps of the scores") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    auto s = oracle::random_scores(seed, 10, 200);
    const double before = eer(s.bona_fide, s.attacks).eer;
    for (auto* v : {&s.bona_fide, &s.attacks})
      for (double& x : *v) x = 4.0 * x + 2.0;  // exact in binary for these magnitudes
    CHECK(eer(s.bona_fide, s.attacks).eer == before);
  }
}

TEST_CASE("evaluate pools attacks and reports each species") {
  std::vector<ScoreRecord> records{
      {"b1", Label::BonaFide, "", 0.1}, {"b2", Label::BonaFide, "", 0.2}, {"b3", Label::BonaFide, "", 0.6},
      {"m1", Label::Attack, "x", 0.9},  {"m2", Label::Attack, "x", 0.8},  {"m3", Label::Attack, "y", 0.15},
  };
  const auto r = evaluate(records);
  CHECK(r.bona_fide_count == 3);
  CHECK(r.attack_count == 3);
  REQUIRE(r.per_species.size() == 2);
  CHECK(r.per_species.at("x").eer == 0.0);
  std::vector<double> bf{0.1, 0.2, 0.6}, all{0.9, 0.8, 0.15};
  CHECK(r.eer == eer(bf, all).eer);
  CHECK(r.bpcer20 == bpcer_at_apcer(bf, all, 0.05));

  const auto curves = det_curves_by_species(records);
  CHECK(curves.size() == 3);
  CHECK(curves.count("all") == 1);

  std::vector<ScoreRecord> only_bf{{"b", Label::BonaFide, "", 0.1}};
  CHECK_THROWS_AS(evaluate(only_bf), DataError);
  std::vector<ScoreRecord> nameless{{"b", Label::BonaFide, "", 0.1}, {"m", Label::Attack, "", 0.2}};
  CHECK_THROWS_AS(evaluate(nameless), DataError);
}

}  // TEST_SUITE

TEST_SUITE("score_io") {

TEST_CASE("scores round-trip exactly") {
  std::vector<ScoreRecord> records{{"p1", Label::BonaFide, "", 0.1 + 0.2},
                                   {"p2", Label::Attack, "opencv", 1.0 / 3.0},
                                   {"p3", Label::Attack, "ubo", 1e-300}};
  std::stringstream ss;
  write_scores(ss, records);
  const auto back = read_scores(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].probe_id == records[i].probe_id);
    CHECK(back[i].label == records[i].label);
    CHECK(back[i].species == records[i].species);
    CHECK(back[i].score == records[i].score);
  }
}

TEST_CASE("malformed score files report the offending line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_scores(in);
    } catch (const DataError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string header = "probe_id,label,species,score\n";
  CHECK(line_of("id,label,score\n") == 1);
  CHECK(line_of(header + "a,bonafide,,0.1\nb,attack,x,zero\n") == 3);
  CHECK(line_of(header + "a,robot,,0.1\n") == 2);
  CHECK(line_of(header + "a,bonafide,,0.1,9\n") == 2);
  CHECK(line_of(header + "a,bonafide,,inf\n") == 2);
  CHECK(line_of(header + "a,bonafide,,0.1\n") == 0);
}

TEST_CASE("report for a frozen score file matches the golden copy") {
  const auto records = read_scores(std::filesystem::path(MORPHGATE_TEST_DATA) / "scores_small.csv");
  std::ostringstream out;
  write_report(out, evaluate(records));
  CHECK(out.str() == testing_util::slurp(std::filesystem::path(MORPHGATE_GOLDEN_DIR) / "report_small.txt"));
}

TEST_CASE("DET files list threshold, APCER and BPCER") {
  std::ostringstream out;
  write_det(out, {{0.5, 0.25, 0.75}});
  CHECK(out.str() == "threshold,apcer,bpcer\n0.5,0.25,0.75\n");
}

}  // TEST_SUITE
