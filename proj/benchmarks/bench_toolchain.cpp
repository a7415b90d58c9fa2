// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "qfabric/controller.hpp"
#include "qfabric/isa.hpp"

namespace {

using namespace qfabric;

std::string sample_program(std::uint32_t layers) {
  FabricConfig cfg;
  cfg.d_in = 4;
  cfg.num_filters = 4;
  std::vector<LayerSpec> specs(layers, LayerSpec{4, 1, true});
  const TensorDims input{32, 32, 4};
  return generate_layer_program(cfg, input, specs, pack_layout(cfg, input, specs));
}

void BM_Assemble(benchmark::State& state) {
  const std::string text = sample_program(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Assemble)->Arg(4)->Arg(64);

void BM_EncodeDecode(benchmark::State& state) {
  const Program program = assemble(sample_program(64));
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_program(encode_program(program)));
  }
}
BENCHMARK(BM_EncodeDecode);

void BM_RunProgram(benchmark::State& state) {
  FabricConfig cfg;
  cfg.d_in = 4;
  cfg.num_filters = 4;
  const std::vector<LayerSpec> specs(2, LayerSpec{4, 1, true});
  const TensorDims input{32, 32, 4};
  const LayoutPlan plan = pack_layout(cfg, input, specs);
  const Program program = build_layer_program(cfg, input, specs, plan);
  MemoryImage mem(layout_extent(cfg, input, specs, plan));
  for (auto _ : state) benchmark::DoNotOptimize(run_program(program, mem, cfg));
}
BENCHMARK(BM_RunProgram);

}  // namespace
