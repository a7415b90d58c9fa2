// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <string>

#include "qfabric/controller.hpp"
#include "qfabric/error.hpp"

namespace qfabric {

namespace {

constexpr std::uint64_t kAlign = 16;

std::uint64_t align_up(std::uint64_t v) { return (v + kAlign - 1) / kAlign * kAlign; }

std::uint64_t weight_bytes(const FabricConfig& cfg, std::uint32_t depth) {
  return kWordBytes * std::uint64_t{depth} * cfg.kernel * cfg.kernel;
}

struct Region {
  std::string name;
  AddressSpace space;
};

std::vector<Region> regions(const FabricConfig& cfg, const TensorDims& input,
                            std::span<const LayerSpec> layers,
                            const LayoutPlan& plan) {
  if (plan.layers.size() != layers.size()) {
    throw Error(ErrorCode::kLayout,
                "layout plan covers " + std::to_string(plan.layers.size()) +
                    " layers, program has " + std::to_string(layers.size()));
  }
  const auto outputs = layer_output_dims(cfg, input, layers);
  std::vector<Region> out;
  out.push_back({"input", {plan.input_base, input.bytes()}});
  TensorDims in = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = plan.layers[l];
    const std::string tag = "layer " + std::to_string(l) + " ";
    out.push_back({tag + "weights",
                   {p.weights_base, layers[l].num_filters * weight_bytes(cfg, in.depth)}});
    out.push_back({tag + "biases",
                   {p.biases_base, kWordBytes * std::uint64_t{layers[l].num_filters}}});
    out.push_back({tag + "outputs", {p.output_base, outputs[l].bytes()}});
    in = outputs[l];
  }
  return out;
}

}  // namespace

std::vector<TensorDims> layer_output_dims(const FabricConfig& cfg,
                                          const TensorDims& input,
                                          std::span<const LayerSpec> layers) {
  cfg.validate();
  std::vector<TensorDims> dims;
  TensorDims in = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (in.depth == 0 || in.depth > cfg.d_in) {
      throw Error(ErrorCode::kConfiguration,
                  "layer " + std::to_string(l) + " input depth " +
                      std::to_string(in.depth) + " outside 1.." +
                      std::to_string(cfg.d_in));
    }
    if (layer.num_filters == 0 || layer.stride == 0) {
      throw Error(ErrorCode::kConfiguration,
                  "layer " + std::to_string(l) + " needs filters and stride >= 1");
    }
    const OutputShape shape = output_shape(in.width, in.height, cfg.kernel,
                                           layer.stride, layer.zero_pad, cfg.pool);
    in = TensorDims{shape.width, shape.height, layer.num_filters};
    dims.push_back(in);
  }
  return dims;
}

LayoutPlan pack_layout(const FabricConfig& cfg, const TensorDims& input,
                       std::span<const LayerSpec> layers, std::uint64_t base) {
  const auto outputs = layer_output_dims(cfg, input, layers);
  LayoutPlan plan;
  std::uint64_t cursor = align_up(base);
  plan.input_base = cursor;
  cursor = align_up(cursor + input.bytes());
  TensorDims in = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    LayerPlacement p;
    p.weights_base = cursor;
    cursor = align_up(cursor + layers[l].num_filters * weight_bytes(cfg, in.depth));
    p.biases_base = cursor;
    cursor = align_up(cursor + kWordBytes * std::uint64_t{layers[l].num_filters});
    p.output_base = cursor;
    cursor = align_up(cursor + outputs[l].bytes());
    plan.layers.push_back(p);
    in = outputs[l];
  }
  return plan;
}

std::uint64_t layout_extent(const FabricConfig& cfg, const TensorDims& input,
                            std::span<const LayerSpec> layers,
                            const LayoutPlan& plan) {
  std::uint64_t end = 0;
  for (const auto& r : regions(cfg, input, layers, plan)) {
    end = std::max(end, r.space.end());
  }
  return end;
}

Program build_layer_program(const FabricConfig& cfg, const TensorDims& input,
                            std::span<const LayerSpec> layers,
                            const LayoutPlan& plan, bool flush_between_layers) {
  const auto all = regions(cfg, input, layers, plan);
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      if (all[a].space.overlaps(all[b].space)) {
        throw Error(ErrorCode::kLayout,
                    all[a].name + " overlaps " + all[b].name);
      }
    }
  }

  const auto outputs = layer_output_dims(cfg, input, layers);
  Program program;
  TensorDims in = input;
  AddressSpace in_space{plan.input_base, input.bytes()};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& layer = layers[l];
    const LayerPlacement& p = plan.layers[l];
    const std::uint64_t wbytes = weight_bytes(cfg, in.depth);
    const std::uint64_t plane_bytes =
        kWordBytes * std::uint64_t{outputs[l].width} * outputs[l].height;
    if (l > 0 && flush_between_layers) program.push_back(flush());
    for (std::uint32_t first = 0; first < layer.num_filters; first += cfg.num_filters) {
      const std::uint32_t count = std::min(cfg.num_filters, layer.num_filters - first);
      program.push_back(load_input(in_space));
      for (std::uint32_t c = 0; c < count; ++c) {
        const std::uint64_t f = first + c;
        program.push_back(load_weights(c, {p.weights_base + f * wbytes, wbytes}));
        program.push_back(load_biases(c, {p.biases_base + f * kWordBytes, kWordBytes}));
        program.push_back(store_outputs(c, {p.output_base + f * plane_bytes, plane_bytes}));
      }
      program.push_back(convolve(in.width, in.height, in.depth, layer.stride,
                                 layer.zero_pad));
    }
    in = outputs[l];
    in_space = AddressSpace{p.output_base, outputs[l].bytes()};
  }
  program.push_back(halt());
  return program;
}

std::string generate_layer_program(const FabricConfig& cfg,
                                   const TensorDims& input,
                                   std::span<const LayerSpec> layers,
                                   const LayoutPlan& plan,
                                   bool flush_between_layers) {
  return disassemble(build_layer_program(cfg, input, layers, plan,
                                         flush_between_layers));
}

}  // namespace qfabric
