#include "morphgate/metrics.hpp"
#include "morphgate/mining.hpp"
#include "morphgate/network.hpp"
#include "morphgate/synth.hpp"
#include "morphgate/training.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace morphgate;

namespace {

std::pair<std::vector<double>, std::vector<double>> scores(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> bf(n), atk(n);
  for (auto& x : bf) x = g(rng);
  for (auto& x : atk) x = 1.0 + g(rng);
  return {bf, atk};
}

network::Batch batch(int rows, int dim) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  network::Batch b{Matrix(rows, dim), {}};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < dim; ++c) b.features(r, c) = g(rng);
    b.labels.push_back(r % 2 ? Label::Attack : Label::BonaFide);
  }
  return b;
}

}  // namespace

static void BM_Eer(benchmark::State& state) {
  const auto [bf, atk] = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::eer(bf, atk));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eer)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_MineSemihard(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  auto b = batch(rows, 32);
  b.features.rowwise().normalize();
  for (auto _ : state) benchmark::DoNotOptimize(mining::mine_semihard(b.features, b.labels));
}
BENCHMARK(BM_MineSemihard)->RangeMultiplier(2)->Range(16, 256);

static void BM_Gradients(benchmark::State& state) {
  const auto params = network::init_params({16, 64, 64, 32}, 3);
  const auto b = batch(static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(network::gradients(params, b));
}
BENCHMARK(BM_Gradients)->Arg(64)->Arg(128)->Arg(256);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto ds = synth::make_dataset(synth::desk_scale_spec());
  network::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(network::train(ds.samples, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
