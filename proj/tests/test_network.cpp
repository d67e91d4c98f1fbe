#include "doctest.h"
#include "oracles.hpp"

#include "morphgate/checkpoint.hpp"
#include "morphgate/network.hpp"

#include <sstream>

using namespace morphgate;
using namespace morphgate::network;

TEST_SUITE("network") {

TEST_CASE("He-uniform initialisation is seeded and bounded") {
  const auto a = init_params({16, 64, 32}, 3);
  const auto b = init_params({16, 64, 32}, 3);
  const auto c = init_params({16, 64, 32}, 4);
  CHECK(a.parameter_count() == 16 * 64 + 64 + 64 * 32 + 32);
  CHECK(a.layers[0].weight == b.layers[0].weight);
  CHECK(a.layers[0].weight != c.layers[0].weight);
  CHECK(a.layers[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 16));
  CHECK(a.layers[1].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 64));
  CHECK(a.layers[1].bias.isZero());
  CHECK(a.input_shift.isZero());
  CHECK(a.input_scale.isOnes());
  CHECK_THROWS_AS(init_params({16}, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_params({16, 0, 4}, 1), std::invalid_argument);
}

TEST_CASE("forward matches the scalar oracle and lands on the unit sphere") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = oracle::gradient_instance(seed);
    const Matrix emb = embed_batch(inst.params, inst.features);
    for (Eigen::Index i = 0; i < inst.features.rows(); ++i) {
      const Vector x = inst.features.row(i).transpose();
      const Vector y = forward(inst.params, x);
      CHECK(std::abs(y.norm() - 1.0) < 1e-12);
      CHECK((emb.row(i).transpose() - y).cwiseAbs().maxCoeff() < 1e-14);
      const auto ref = oracle::scalar_forward(inst.params, x);
      for (Eigen::Index k = 0; k < y.size(); ++k)
        CHECK(std::abs(y(k) - static_cast<double>(ref[static_cast<std::size_t>(k)])) < 1e-12);
    }
  }
}

TEST_CASE("a single identity layer just normalises") {
  auto p = init_params({2, 2}, 1);
  p.layers[0].weight.setIdentity();
  Vector x(2);
  x << 3.0, 4.0;
  const Vector y = forward(p, x);
  CHECK(y(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("input standardisation") {
  Matrix x(4, 2);
  x << 1, 5, 3, 5, 5, 5, 7, 5;
  auto p = init_params({2, 3}, 1);
  fit_input_standardisation(p, x);
  CHECK(p.input_shift(0) == 4.0);
  CHECK(p.input_scale(0) == std::sqrt(5.0));
  CHECK(p.input_shift(1) == 5.0);
  CHECK(p.input_scale(1) == 1.0);  // constant feature
  CHECK_THROWS_AS(fit_input_standardisation(p, Matrix(4, 3)), std::invalid_argument);
  p.input_scale(0) = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("shape and finiteness errors") {
  auto p = init_params({3, 4, 2}, 1);
  CHECK_THROWS_AS(forward(p, Vector::Zero(4)), std::invalid_argument);
  p.layers[1].weight(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(p), NumericError);
  try {
    forward(p, Vector::Ones(3));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.layer() == 1);
  }
  auto q = init_params({2, 2}, 1);
  q.layers[0].weight.setZero();
  CHECK_THROWS_AS(forward(q, Vector::Ones(2)), NumericError);  // zero embedding
}

TEST_CASE("gradients agree with central differences of the fixed-triplet loss") {
  for (std::uint64_t seed = 11; seed <= 16; ++seed) {
    const auto inst = oracle::gradient_instance(seed);
    const Batch batch{inst.features, inst.labels};
    const auto g = gradients(inst.params, batch, 0.2);
    REQUIRE(!g.triplets.empty());
    const auto check = oracle::check_gradients(inst.params, inst.features, g.triplets, 0.2, g.grads);
    CHECK(check.coordinates == inst.params.parameter_count());
    CHECK(check.failures == 0);
    CHECK(g.loss.loss == doctest::Approx(static_cast<double>(
                             oracle::fixed_triplet_loss(inst.params, inst.features, g.triplets, 0.2)))
                             .epsilon(1e-12));
  }
}

TEST_CASE("loss and gradient agree on the mined set") {
  const auto inst = oracle::gradient_instance(21);
  const Batch batch{inst.features, inst.labels};
  const auto loss = batch_loss(inst.params, batch, 0.2);
  const auto g = gradients(inst.params, batch, 0.2);
  CHECK(loss.loss == g.loss.loss);
  CHECK(loss.triplet_count == g.triplets.size());
}

TEST_CASE("a degenerate batch yields zero loss and zero gradient") {
  auto inst = oracle::gradient_instance(22);
  std::fill(inst.labels.begin(), inst.labels.end(), Label::BonaFide);
  const auto g = gradients(inst.params, {inst.features, inst.labels}, 0.2);
  CHECK(g.loss.degenerate);
  CHECK(g.loss.loss == 0.0);
  for (const auto& l : g.grads) {
    CHECK(l.weight.isZero());
    CHECK(l.bias.isZero());
  }
}

TEST_CASE("first Adam step moves each coordinate by about the learning rate") {
  auto p = init_params({3, 2}, 9);
  const auto before = p;
  Gradients g = zeros_like(p);
  g[0].weight << 0.5, -2.0, 0.0, 1e-3, 3.0, -0.25;
  g[0].bias << 1.0, -1.0;
  auto state = make_adam_state(p);
  adam_step(p, g, state, 0.01);
  CHECK(state.step == 1);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double gi = g[0].weight(r, c);
      const double expect = before.layers[0].weight(r, c) - 0.01 * gi / (std::abs(gi) + 1e-8);
      CHECK(p.layers[0].weight(r, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  CHECK(p.layers[0].bias(0) == doctest::Approx(-0.01 * 1.0 / (1.0 + 1e-8)).epsilon(1e-12));

  // second step against a hand-rolled recursion
  Gradients g2 = zeros_like(p);
  g2[0].bias << -3.0, 0.5;
  const double b = p.layers[0].bias(0);
  adam_step(p, g2, state, 0.01);
  const double m = 0.9 * (0.1 * 1.0) + 0.1 * -3.0;
  const double v = 0.999 * (0.001 * 1.0) + 0.001 * 9.0;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  CHECK(p.layers[0].bias(0) == doctest::Approx(b - 0.01 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-12));

  Gradients wrong = zeros_like(init_params({3, 3}, 1));
  CHECK_THROWS_AS(adam_step(p, wrong, state, 0.01), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("checkpoint") {

TEST_CASE("save and load round-trip bit for bit") {
  auto inst = oracle::gradient_instance(5);
  Checkpoint cp{inst.params, 0.3, 99};
  std::stringstream ss;
  save_checkpoint(ss, cp);
  const auto text = ss.str();
  const auto back = load_checkpoint(ss);
  CHECK(back.margin == 0.3);
  CHECK(back.seed == 99);
  CHECK(back.params.layer_dims == cp.params.layer_dims);
  CHECK(back.params.input_shift == cp.params.input_shift);
  CHECK(back.params.input_scale == cp.params.input_scale);
  for (std::size_t l = 0; l < cp.params.layers.size(); ++l) {
    CHECK(back.params.layers[l].weight == cp.params.layers[l].weight);
    CHECK(back.params.layers[l].bias == cp.params.layers[l].bias);
  }
  std::stringstream again;
  save_checkpoint(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("malformed checkpoints are rejected") {
  const auto p = init_params({2, 2}, 1);
  std::stringstream ss;
  save_checkpoint(ss, {p, 0.2, 1});
  const std::string good = ss.str();

  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_checkpoint(in);
  };
  CHECK_NOTHROW(load(good));
  CHECK_THROWS_AS(load("morphgate-checkpoint 99\n"), DataError);
  CHECK_THROWS_AS(load(good.substr(0, good.size() - 4)), DataError);
  std::string bad_count = good;
  bad_count.replace(bad_count.find("parameters 6"), 12, "parameters 7");
  CHECK_THROWS_AS(load(bad_count), DataError);
  std::string bad_value = good;
  bad_value.replace(bad_value.rfind('\n', bad_value.size() - 2) + 1, std::string::npos, "abc\n");
  CHECK_THROWS_AS(load(bad_value), DataError);
}

}  // TEST_SUITE
