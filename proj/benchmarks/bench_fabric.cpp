// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "qfabric/fabric.hpp"

namespace {

using namespace qfabric;

Tensor random_tensor(std::uint32_t w, std::uint32_t h, std::uint32_t d,
                     std::mt19937_64& rng) {
  Tensor t(w, h, d);
  std::uniform_int_distribution<std::int32_t> dist(-32768, 32767);
  for (auto& v : t.raws()) v = dist(rng);
  return t;
}

void BM_MatrixWebForward(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const auto k = static_cast<std::uint32_t>(state.range(1));
  std::mt19937_64 rng(1);
  FabricConfig cfg;
  cfg.d_in = 3;
  cfg.kernel = k;
  cfg.num_filters = 4;
  const Tensor input = random_tensor(size, size, cfg.d_in, rng);
  FilterSet filters(cfg.num_filters, cfg.d_in, k);
  std::uniform_int_distribution<std::int32_t> wdist(-16384, 16384);
  for (auto& w : filters.weights) w = wdist(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matrix_web_forward(input, filters, cfg, 1, true));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t{size} * size *
                          cfg.num_filters);
}
BENCHMARK(BM_MatrixWebForward)->Args({32, 3})->Args({32, 5})->Args({64, 3});

void BM_ReduceTree(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int32_t> dist(-1 << 20, 1 << 20);
  std::vector<std::int32_t> leaves(n);
  for (auto& v : leaves) v = dist(rng);
  std::vector<std::int32_t> scratch(n);
  for (auto _ : state) {
    scratch = leaves;
    benchmark::DoNotOptimize(reduce_tree(scratch, kDefaultFormat));
  }
}
BENCHMARK(BM_ReduceTree)->RangeMultiplier(4)->Range(16, 1024);

void BM_Activation(benchmark::State& state) {
  const ActivationUnit unit(static_cast<Activation>(state.range(0)), kDefaultFormat);
  std::int32_t raw = -(1 << 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(unit.apply(raw));
    raw = raw >= (1 << 19) ? -(1 << 19) : raw + 97;
  }
}
BENCHMARK(BM_Activation)->DenseRange(0, 3);

void BM_Encode(benchmark::State& state) {
  double x = -100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_raw(x, kDefaultFormat));
    x = x > 100.0 ? -100.0 : x + 0.013;
  }
}
BENCHMARK(BM_Encode);

}  // namespace
