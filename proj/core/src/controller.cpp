// SPDX-License-Identifier: Apache-2.0
#include "qfabric/controller.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "qfabric/analysis/cost_model.hpp"
#include "qfabric/error.hpp"

namespace qfabric {

std::string RunReport::to_text() const {
  std::ostringstream os;
  os << "instructions_executed=" << instructions_executed << '\n'
     << "layers_executed=" << layers_executed << '\n'
     << "overflow_events=" << overflow_events << '\n'
     << "cycle_estimate_model=" << cycle_estimate << '\n';
  return os.str();
}

Controller::Controller(const FabricConfig& cfg, Program program) : cfg_(cfg) {
  cfg_.validate();
  state_.program = std::move(program);
  state_.cbus.resize(cfg_.num_filters);
  cbus_.assign(cfg_.num_filters, CellBodyUnit(cfg_));
}

void Controller::step(MemoryImage& mem) {
  if (state_.phase == Phase::kHalted) {
    throw Error(ErrorCode::kConfiguration, "controller is halted");
  }
  if (state_.pc >= state_.program.size()) {
    throw Error(ErrorCode::kRunawayProgram,
                "pc " + std::to_string(state_.pc) +
                    " ran past the end of the program without HALT");
  }
  const Instruction ins = state_.program[state_.pc];
  if (const auto* mw = std::get_if<MWControl>(&ins)) {
    execute(*mw, mem);
  } else {
    execute(std::get<MemControl>(ins));
  }
  ++state_.pc;
  ++report_.instructions_executed;
  report_.overflow_events = overflow_.count();
}

RunReport Controller::run(MemoryImage& mem) {
  while (state_.phase != Phase::kHalted) step(mem);
  return report_;
}

void Controller::execute(const MemControl& mc) {
  if (mc.kind == MemKind::kInputFeatures) {
    state_.input_space = mc.space;
  } else {
    if (mc.cbu >= cfg_.num_filters) {
      throw Error(ErrorCode::kConfiguration,
                  std::string(mnemonic(mc.kind)) + " targets cbu " +
                      std::to_string(mc.cbu) + " but the fabric has " +
                      std::to_string(cfg_.num_filters));
    }
    auto& regs = state_.cbus[mc.cbu];
    switch (mc.kind) {
      case MemKind::kWeights: regs.weights = mc.space; break;
      case MemKind::kBiases: regs.biases = mc.space; break;
      case MemKind::kOutputs: regs.outputs = mc.space; break;
      case MemKind::kInputFeatures: break;
    }
  }
  state_.phase = Phase::kConfigured;
}

void Controller::execute(const MWControl& mw, MemoryImage& mem) {
  switch (mw.config) {
    case ConfigOp::kNop: break;
    case ConfigOp::kStop: state_.phase = Phase::kHalted; break;
    case ConfigOp::kFlush:
      for (auto& cbu : cbus_) cbu.flush();
      break;
    case ConfigOp::kConvolve: convolve(mw, mem); break;
  }
}

void Controller::convolve(const MWControl& mw, MemoryImage& mem) {
  if (!state_.input_space) {
    throw Error(ErrorCode::kConfiguration, "CONV before any LDI");
  }
  if (mw.ifd_width == 0 || mw.ifd_height == 0 || mw.stride == 0) {
    throw Error(ErrorCode::kConfiguration,
                "CONV needs non-zero width, height and stride");
  }
  if (mw.ifd_depth == 0 || mw.ifd_depth > cfg_.d_in) {
    throw Error(ErrorCode::kConfiguration,
                "CONV depth " + std::to_string(mw.ifd_depth) +
                    " outside 1.." + std::to_string(cfg_.d_in) +
                    " MAC units per CBU");
  }
  std::vector<std::uint32_t> active;
  for (std::uint32_t c = 0; c < cfg_.num_filters; ++c) {
    const auto& regs = state_.cbus[c];
    if (!regs.any()) continue;
    if (!regs.complete()) {
      throw Error(ErrorCode::kConfiguration,
                  "cbu " + std::to_string(c) +
                      " needs weight, bias and output spaces before CONV");
    }
    active.push_back(c);
  }
  if (active.empty()) {
    throw Error(ErrorCode::kConfiguration, "CONV with no configured CBU");
  }

  state_.ifd_width = mw.ifd_width;
  state_.ifd_height = mw.ifd_height;
  state_.ifd_depth = mw.ifd_depth;
  state_.stride = mw.stride;
  state_.zero_pad = mw.zero_pad;

  // A pass with fewer input planes leaves the remaining MAC units idle; the
  // zero-padded depth tree makes that identical to a d-plane fabric.
  FabricConfig layer = cfg_;
  layer.d_in = mw.ifd_depth;
  const OutputShape shape = output_shape(mw.ifd_width, mw.ifd_height,
                                         layer.kernel, mw.stride, mw.zero_pad,
                                         layer.pool);
  const std::uint64_t weight_bytes =
      kWordBytes * std::uint64_t{layer.d_in} * layer.kernel * layer.kernel;
  const std::uint64_t plane_bytes =
      kWordBytes * std::uint64_t{shape.width} * shape.height;

  // Bulk-load caches for every active CBU.
  FilterSet params(static_cast<std::uint32_t>(active.size()), layer.d_in,
                   layer.kernel, layer.format);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& regs = state_.cbus[active[i]];
    const std::string who = "cbu " + std::to_string(active[i]);
    if (regs.weights->length != weight_bytes || regs.biases->length != kWordBytes) {
      throw Error(ErrorCode::kSize,
                  who + " weight/bias spaces hold " +
                      std::to_string(regs.weights->length) + "/" +
                      std::to_string(regs.biases->length) + " bytes, layer needs " +
                      std::to_string(weight_bytes) + "/4");
    }
    if (regs.outputs->length != plane_bytes) {
      throw Error(ErrorCode::kSize,
                  who + " output space holds " +
                      std::to_string(regs.outputs->length) + " bytes, plane needs " +
                      std::to_string(plane_bytes));
    }
    const auto weights = mem.load_words(*regs.weights);
    std::copy(weights.begin(), weights.end(),
              params.weights.begin() + i * params.weights_per_filter());
    params.biases[i] = mem.load_words(*regs.biases).front();
  }
  params.validate();
  for (std::size_t i = 0; i < active.size(); ++i) {
    auto& cbu = cbus_[active[i]];
    cbu = CellBodyUnit(layer);
    cbu.load(params.filter_weights(static_cast<std::uint32_t>(i)), params.biases[i]);
  }

  const Tensor input = read_tensor(mem, *state_.input_space, mw.ifd_width,
                                   mw.ifd_height, mw.ifd_depth, layer.format);
  std::vector<Tensor> planes;
  planes.reserve(active.size());
  for (const std::uint32_t c : active) {
    planes.push_back(cbus_[c].forward(input, mw.stride, mw.zero_pad, &overflow_));
  }
  for (std::size_t i = 0; i < active.size(); ++i) {
    mem.store_words(*state_.cbus[active[i]].outputs, planes[i].raws());
  }

  ++report_.layers_executed;
  report_.cycle_estimate +=
      analysis::cycle_model(layer, mw.ifd_width, mw.ifd_height, mw.stride,
                            mw.zero_pad)
          .total;

  state_.input_space.reset();
  for (auto& regs : state_.cbus) regs = CbuRegisters{};
  state_.phase = Phase::kIdle;
}

RunReport run_program(const Program& program, MemoryImage& mem,
                      const FabricConfig& cfg) {
  Controller controller(cfg, program);
  return controller.run(mem);
}

}  // namespace qfabric
