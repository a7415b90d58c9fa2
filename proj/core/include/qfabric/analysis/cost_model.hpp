// SPDX-License-Identifier: Apache-2.0
//
// Resource and cycle cost model of one fabric configuration.
//
// Multiplier, adder and instruction-fetch counts are closed-form hardware
// formulas. The DSP count assumes 4 DSP slices per 32-bit multiplier, which
// reproduces the measured single-CBU utilization tables exactly. The weight
// load and compute cycle counts are models: the hardware description states
// what they depend on but not how, so treat them as estimates.
#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "qfabric/fabric.hpp"

namespace qfabric::analysis {

// All functions throw Error(kInvalidInput) on a zero argument.

std::uint64_t multipliers_per_mac(std::uint32_t kernel);
std::uint64_t multipliers_per_cbu(std::uint32_t kernel, std::uint32_t d_in);
/// d_in * sum_{r=0}^{ceil(2 log2 k)} 2^r + sum_{p=0}^{ceil(log2 d_in)} 2^p
std::uint64_t adders_per_cbu(std::uint32_t kernel, std::uint32_t d_in);
std::uint64_t dsp_per_cbu(std::uint32_t kernel, std::uint32_t d_in);
/// gamma + (d_in + 2) * gamma + 1
std::uint64_t fetch_cycles(std::uint32_t gamma, std::uint32_t d_in);

/// Adder-tree stages of one CBU plus the bias and activation stages.
std::uint32_t pipeline_depth(std::uint32_t kernel, std::uint32_t d_in);

/// Informational peak: one multiply and one add per multiplier per cycle.
std::uint64_t ops_per_cycle(std::uint32_t gamma, std::uint32_t d_in,
                            std::uint32_t kernel);

struct CycleEstimate {
  std::uint64_t fetch = 0;
  std::uint64_t weight_load = 0;  // model
  std::uint64_t compute = 0;      // model
  std::uint64_t total = 0;

  bool operator==(const CycleEstimate&) const = default;
};

/// gamma = cfg.num_filters. weight_load = gamma * (d_in * k^2 + 1);
/// compute = conv_width * conv_height + pipeline_depth.
CycleEstimate cycle_model(const FabricConfig& cfg, std::uint32_t in_width,
                          std::uint32_t in_height, std::uint32_t stride,
                          bool zero_pad);

struct ResourceReport {
  std::uint64_t multipliers_per_mac = 0;
  std::uint64_t multipliers_per_cbu = 0;
  std::uint64_t adders_per_cbu = 0;
  std::uint64_t dsp_per_cbu = 0;
  std::uint64_t fetch_cycles = 0;
  std::uint64_t compute_cycles_model = 0;
};

ResourceReport resource_report(const FabricConfig& cfg, std::uint32_t in_width,
                               std::uint32_t in_height, std::uint32_t stride,
                               bool zero_pad);

/// Post-implementation utilization of a single CBU on a Virtex-7, bundled as
/// reference data. LUT and FF are not modeled.
struct CbuUtilization {
  std::uint32_t kernel;
  std::uint32_t d_in;
  std::uint32_t lut;
  std::uint32_t ff;
  std::uint32_t dsp;
};
std::span<const CbuUtilization> reference_cbu_utilization();

// CSV writers. Headers:
//   resources  k,d_in,multipliers,adders,dsp
//   cycles     gamma,d_in,k,fetch,weight_load,compute,total
struct ResourceRow {
  std::uint32_t kernel;
  std::uint32_t d_in;
};
void write_resources_csv(std::ostream& os, std::span<const ResourceRow> rows);

struct CycleRow {
  std::uint32_t gamma;
  std::uint32_t d_in;
  std::uint32_t kernel;
  CycleEstimate estimate;
};
void write_cycles_csv(std::ostream& os, std::span<const CycleRow> rows);

}  // namespace qfabric::analysis
