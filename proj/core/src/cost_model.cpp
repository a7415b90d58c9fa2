// SPDX-License-Identifier: Apache-2.0
#include "qfabric/analysis/cost_model.hpp"

#include <array>
#include <bit>
#include <string>

#include "qfabric/error.hpp"

namespace qfabric::analysis {

namespace {

void require_positive(std::uint32_t v, const char* name) {
  if (v == 0) {
    throw Error(ErrorCode::kInvalidInput, std::string(name) + " must be >= 1");
  }
}

// Smallest e with 2^e >= n, i.e. ceil(log2 n) for n >= 1.
std::uint32_t ceil_log2(std::uint64_t n) {
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

// 2^0 + 2^1 + ... + 2^upper
std::uint64_t geometric_sum(std::uint32_t upper) {
  return (std::uint64_t{1} << (upper + 1)) - 1;
}

constexpr std::array<CbuUtilization, 14> kReference{{
    {3, 1, 2416, 1299, 36},    {4, 1, 3374, 2013, 64},
    {5, 1, 5683, 3157, 100},   {6, 1, 7913, 4433, 144},
    {7, 1, 10536, 5978, 196},  {8, 1, 13143, 7587, 256},
    {9, 1, 17338, 9784, 324},  {3, 3, 6721, 3159, 108},
    {4, 3, 9360, 4857, 192},   {5, 3, 15039, 7713, 300},
    {6, 3, 22169, 10837, 432}, {7, 3, 29487, 14626, 588},
    {8, 3, 36812, 18503, 768}, {9, 3, 48684, 23992, 972},
}};

}  // namespace

std::uint64_t multipliers_per_mac(std::uint32_t kernel) {
  require_positive(kernel, "kernel");
  return std::uint64_t{kernel} * kernel;
}

std::uint64_t multipliers_per_cbu(std::uint32_t kernel, std::uint32_t d_in) {
  require_positive(d_in, "d_in");
  return d_in * multipliers_per_mac(kernel);
}

std::uint64_t adders_per_cbu(std::uint32_t kernel, std::uint32_t d_in) {
  require_positive(kernel, "kernel");
  require_positive(d_in, "d_in");
  // ceil(2 log2 k) == ceil(log2 k^2)
  const std::uint32_t mac_upper = ceil_log2(std::uint64_t{kernel} * kernel);
  const std::uint32_t depth_upper = ceil_log2(d_in);
  return d_in * geometric_sum(mac_upper) + geometric_sum(depth_upper);
}

std::uint64_t dsp_per_cbu(std::uint32_t kernel, std::uint32_t d_in) {
  return 4 * multipliers_per_cbu(kernel, d_in);
}

std::uint64_t fetch_cycles(std::uint32_t gamma, std::uint32_t d_in) {
  require_positive(gamma, "gamma");
  require_positive(d_in, "d_in");
  return gamma + (std::uint64_t{d_in} + 2) * gamma + 1;
}

std::uint32_t pipeline_depth(std::uint32_t kernel, std::uint32_t d_in) {
  require_positive(kernel, "kernel");
  require_positive(d_in, "d_in");
  return ceil_log2(std::bit_ceil(std::uint64_t{kernel} * kernel)) +
         ceil_log2(std::bit_ceil(std::uint64_t{d_in})) + 2;
}

std::uint64_t ops_per_cycle(std::uint32_t gamma, std::uint32_t d_in,
                            std::uint32_t kernel) {
  require_positive(gamma, "gamma");
  return 2 * std::uint64_t{gamma} * multipliers_per_cbu(kernel, d_in);
}

CycleEstimate cycle_model(const FabricConfig& cfg, std::uint32_t in_width,
                          std::uint32_t in_height, std::uint32_t stride,
                          bool zero_pad) {
  cfg.validate();
  const OutputShape shape =
      output_shape(in_width, in_height, cfg.kernel, stride, zero_pad, 1);
  CycleEstimate est;
  est.fetch = fetch_cycles(cfg.num_filters, cfg.d_in);
  est.weight_load = std::uint64_t{cfg.num_filters} *
                    (multipliers_per_cbu(cfg.kernel, cfg.d_in) + 1);
  est.compute = std::uint64_t{shape.conv_width} * shape.conv_height +
                pipeline_depth(cfg.kernel, cfg.d_in);
  est.total = est.fetch + est.weight_load + est.compute;
  return est;
}

ResourceReport resource_report(const FabricConfig& cfg, std::uint32_t in_width,
                               std::uint32_t in_height, std::uint32_t stride,
                               bool zero_pad) {
  ResourceReport report;
  report.multipliers_per_mac = multipliers_per_mac(cfg.kernel);
  report.multipliers_per_cbu = multipliers_per_cbu(cfg.kernel, cfg.d_in);
  report.adders_per_cbu = adders_per_cbu(cfg.kernel, cfg.d_in);
  report.dsp_per_cbu = dsp_per_cbu(cfg.kernel, cfg.d_in);
  const CycleEstimate est = cycle_model(cfg, in_width, in_height, stride, zero_pad);
  report.fetch_cycles = est.fetch;
  report.compute_cycles_model = est.compute;
  return report;
}

std::span<const CbuUtilization> reference_cbu_utilization() { return kReference; }

void write_resources_csv(std::ostream& os, std::span<const ResourceRow> rows) {
  os << "k,d_in,multipliers,adders,dsp\n";
  for (const auto& row : rows) {
    os << row.kernel << ',' << row.d_in << ','
       << multipliers_per_cbu(row.kernel, row.d_in) << ','
       << adders_per_cbu(row.kernel, row.d_in) << ','
       << dsp_per_cbu(row.kernel, row.d_in) << '\n';
  }
}

void write_cycles_csv(std::ostream& os, std::span<const CycleRow> rows) {
  os << "gamma,d_in,k,fetch,weight_load,compute,total\n";
  for (const auto& row : rows) {
    os << row.gamma << ',' << row.d_in << ',' << row.kernel << ','
       << row.estimate.fetch << ',' << row.estimate.weight_load << ','
       << row.estimate.compute << ',' << row.estimate.total << '\n';
  }
}

}  // namespace qfabric::analysis
