// SPDX-License-Identifier: Apache-2.0
// Runs layer stacks through the controller and through direct fabric calls.
#pragma once

#include <algorithm>
#include <optional>

#include "fabric_cases.hpp"
#include "qfabric/controller.hpp"

namespace qfabric::testing {

struct LayerStack {
  FabricConfig cfg;
  Tensor input;
  std::vector<LayerSpec> specs;
  std::vector<FilterSet> filters;
};

inline TensorDims dims_of(const Tensor& t) { return {t.width(), t.height(), t.depth()}; }

// Shuffles each run of memory instructions that precedes a CONV.
inline void shuffle_groups(Program& program, Gen& gen) {
  auto begin = program.begin();
  while (begin != program.end()) {
    auto end = std::find_if(begin, program.end(), [](const Instruction& ins) {
      return std::holds_alternative<MWControl>(ins);
    });
    std::shuffle(begin, end, gen.engine());
    begin = end == program.end() ? end : end + 1;
  }
}

struct ControllerRun {
  Tensor output;
  RunReport report;
};

inline ControllerRun run_stack(const LayerStack& s, bool flush = false,
                               Gen* shuffle = nullptr) {
  const TensorDims in = dims_of(s.input);
  const LayoutPlan plan = pack_layout(s.cfg, in, s.specs, 64);
  Program program = build_layer_program(s.cfg, in, s.specs, plan, flush);
  if (shuffle) shuffle_groups(program, *shuffle);
  MemoryImage mem(layout_extent(s.cfg, in, s.specs, plan) + 32);
  write_tensor(mem, {plan.input_base, in.bytes()}, s.input);
  for (std::size_t l = 0; l < s.specs.size(); ++l) {
    const FilterSet& f = s.filters[l];
    mem.store_words({plan.layers[l].weights_base, f.weights.size() * kWordBytes}, f.weights);
    mem.store_words({plan.layers[l].biases_base, f.biases.size() * kWordBytes}, f.biases);
  }
  const RunReport report = run_program(program, mem, s.cfg);
  const TensorDims out = layer_output_dims(s.cfg, in, s.specs).back();
  return {read_tensor(mem, {plan.layers.back().output_base, out.bytes()}, out.width,
                      out.height, out.depth, s.cfg.format),
          report};
}

// Function composition of single-pass fabric calls sized to each layer.
inline Tensor compose_direct(const LayerStack& s) {
  Tensor x = s.input;
  for (std::size_t l = 0; l < s.specs.size(); ++l) {
    FabricConfig layer = s.cfg;
    layer.d_in = x.depth();
    layer.num_filters = s.specs[l].num_filters;
    x = matrix_web_forward(x, s.filters[l], layer, s.specs[l].stride, s.specs[l].zero_pad);
  }
  return x;
}

// Random stack of `layers` layers. When `multi_pass` is set every layer has
// more filters than CBUs; otherwise no layer does.
inline std::optional<LayerStack> try_random_stack(Gen& gen, std::size_t layers,
                                                 bool multi_pass) {
  LayerStack s;
  s.cfg.kernel = gen.urange(1, 5);
  s.cfg.d_in = gen.urange(1, 4);
  s.cfg.num_filters = gen.urange(1, 4);
  s.cfg.pool = gen.urange(1, 2);
  s.cfg.activation = gen.pick(all_activations());

  std::uint32_t depth = gen.urange(1, s.cfg.d_in);
  std::uint32_t w = gen.urange(8, 14), h = gen.urange(8, 14);
  s.input = gen.tensor(w, h, depth, -4, 4);
  for (std::size_t l = 0; l < layers; ++l) {
    LayerSpec spec;
    const std::uint32_t cap = l + 1 < layers ? s.cfg.d_in : 8;
    spec.num_filters = multi_pass ? gen.urange(s.cfg.num_filters + 1, s.cfg.num_filters + 5)
                                  : gen.urange(1, std::min(s.cfg.num_filters, cap));
    if (multi_pass && l + 1 < layers) {
      // The next layer reads these planes, so they must fit the MAC count.
      s.cfg.d_in = std::max(s.cfg.d_in, spec.num_filters);
    }
    spec.stride = gen.urange(1, 2);
    spec.zero_pad = gen.coin();
    if (std::min(w, h) < min_extent(s.cfg.kernel, spec.stride, spec.zero_pad, s.cfg.pool))
      return std::nullopt;
    const OutputShape shape =
        output_shape(w, h, s.cfg.kernel, spec.stride, spec.zero_pad, s.cfg.pool);
    s.specs.push_back(spec);
    s.filters.push_back(gen.filters(spec.num_filters, depth, s.cfg.kernel, 1.0, 0.5));
    depth = spec.num_filters;
    w = shape.width;
    h = shape.height;
  }
  return s;
}

inline LayerStack random_stack(Gen& gen, std::size_t layers, bool multi_pass) {
  while (true) {
    if (auto s = try_random_stack(gen, layers, multi_pass)) return *std::move(s);
  }
}

}  // namespace qfabric::testing
