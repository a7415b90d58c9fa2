// SPDX-License-Identifier: Apache-2.0
//
// Process Controller: fetches instructions and sequences memory transfers
// and Matrix Web passes.
//
// Memory-control instructions latch address registers. CONV then runs one
// whole layer pass atomically: the weight and bias spaces of every active
// CBU are bulk-loaded into its caches, the input space is read, every
// active CBU produces its plane, and each plane is written contiguously to
// that CBU's output space. Registers are consumed by the pass; caches stay
// loaded until FLUSH or the next pass.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfabric/fabric.hpp"
#include "qfabric/isa.hpp"
#include "qfabric/memory.hpp"

namespace qfabric {

enum class Phase { kIdle, kConfigured, kHalted };

struct CbuRegisters {
  std::optional<AddressSpace> weights;
  std::optional<AddressSpace> biases;
  std::optional<AddressSpace> outputs;

  bool any() const { return weights || biases || outputs; }
  bool complete() const { return weights && biases && outputs; }
};

struct ControllerState {
  Program program;
  std::size_t pc = 0;
  std::optional<AddressSpace> input_space;
  std::vector<CbuRegisters> cbus;
  std::uint32_t ifd_width = 0;
  std::uint32_t ifd_height = 0;
  std::uint32_t ifd_depth = 0;
  std::uint32_t stride = 0;
  bool zero_pad = false;
  Phase phase = Phase::kIdle;
};

struct RunReport {
  std::uint64_t instructions_executed = 0;
  std::uint64_t layers_executed = 0;  // CONV passes
  std::uint64_t overflow_events = 0;
  std::uint64_t cycle_estimate = 0;   // model

  /// key=value lines.
  std::string to_text() const;
};

class Controller {
 public:
  Controller(const FabricConfig& cfg, Program program);

  /// Executes the instruction at pc. Throws Error(kRunawayProgram) past the
  /// end of the program, Error(kConfiguration) when halted or when CONV
  /// finds unset registers, and Error(kSize) when an address space does not
  /// match the layer geometry.
  void step(MemoryImage& mem);

  /// Steps until HALT.
  RunReport run(MemoryImage& mem);

  const ControllerState& state() const { return state_; }
  const std::vector<CellBodyUnit>& cbus() const { return cbus_; }
  const RunReport& report() const { return report_; }

 private:
  void execute(const MWControl& mw, MemoryImage& mem);
  void execute(const MemControl& mc);
  void convolve(const MWControl& mw, MemoryImage& mem);

  FabricConfig cfg_;
  ControllerState state_;
  std::vector<CellBodyUnit> cbus_;
  RunReport report_;
  OverflowCounter overflow_;
};

RunReport run_program(const Program& program, MemoryImage& mem,
                      const FabricConfig& cfg);

// ---- program generation -------------------------------------------------

struct LayerSpec {
  std::uint32_t num_filters = 1;
  std::uint32_t stride = 1;
  bool zero_pad = false;
};

/// Where one layer's parameters and results live. Weights of filter f start
/// at weights_base + f * 4 * d * k^2 (the filter-file order), bias f at
/// biases_base + 4 * f, and output plane f at output_base + f * plane bytes.
struct LayerPlacement {
  std::uint64_t weights_base = 0;
  std::uint64_t biases_base = 0;
  std::uint64_t output_base = 0;
};

struct LayoutPlan {
  std::uint64_t input_base = 0;
  std::vector<LayerPlacement> layers;
};

struct TensorDims {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t depth = 0;

  std::uint64_t bytes() const {
    return kWordBytes * std::uint64_t{width} * height * depth;
  }
  bool operator==(const TensorDims&) const = default;
};

/// Shapes of every layer output, validating each layer against the fabric.
std::vector<TensorDims> layer_output_dims(const FabricConfig& cfg,
                                          const TensorDims& input,
                                          std::span<const LayerSpec> layers);

/// Packs input, then per layer weights, biases and outputs back to back
/// from `base`, each region aligned to 16 bytes.
LayoutPlan pack_layout(const FabricConfig& cfg, const TensorDims& input,
                       std::span<const LayerSpec> layers, std::uint64_t base = 0);

/// Total bytes spanned by a layout (highest region end).
std::uint64_t layout_extent(const FabricConfig& cfg, const TensorDims& input,
                            std::span<const LayerSpec> layers,
                            const LayoutPlan& plan);

/// Emits LDI / LDW / LDB / STO / CONV passes for every layer and a final
/// HALT. Layers with more filters than CBUs run in ceil(N / gamma) passes
/// over the same input. Throws Error(kLayout) when regions overlap or the
/// plan does not cover every layer.
Program build_layer_program(const FabricConfig& cfg, const TensorDims& input,
                            std::span<const LayerSpec> layers,
                            const LayoutPlan& plan,
                            bool flush_between_layers = false);

std::string generate_layer_program(const FabricConfig& cfg,
                                   const TensorDims& input,
                                   std::span<const LayerSpec> layers,
                                   const LayoutPlan& plan,
                                   bool flush_between_layers = false);

}  // namespace qfabric
