// SPDX-License-Identifier: Apache-2.0
#include "qfabric/analysis/error_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <random>
#include <string>

#include "qfabric/analysis/oracles.hpp"
#include "qfabric/error.hpp"
#include "qfabric/fabric.hpp"

namespace qfabric::analysis {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ErrorSweepRow sweep_cell(std::uint32_t kernel, const InputRange& range,
                         std::size_t range_index, std::uint64_t trials,
                         std::uint64_t seed, const QFormat& fmt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), kernel,
                    static_cast<std::uint32_t>(range_index)};
  std::mt19937_64 rng(seq);

  FabricConfig cfg;
  cfg.d_in = 1;
  cfg.kernel = kernel;
  cfg.num_filters = 1;
  cfg.pool = 1;
  cfg.activation = Activation::kPassthrough;
  cfg.format = fmt;

  const std::size_t taps = std::size_t{kernel} * kernel;
  RealTensor window(kernel, kernel, 1);
  RealFilterSet weights;
  weights.num_filters = 1;
  weights.depth = 1;
  weights.kernel = kernel;
  weights.weights.resize(taps);
  weights.biases.assign(1, 0.0);

  OverflowCounter overflow;
  double sum = 0.0;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Tensor fixed_window(kernel, kernel, 1, fmt);
    FilterSet fixed_weights(1, 1, kernel, fmt);
    for (std::size_t i = 0; i < taps; ++i) {
      window.data[i] = range.lo + (range.hi - range.lo) * unit(rng);
      weights.weights[i] = -1.0 + 2.0 * unit(rng);
      fixed_window.raws()[i] = encode_raw(window.data[i], fmt, &overflow);
      fixed_weights.weights[i] = encode_raw(weights.weights[i], fmt, &overflow);
    }
    const Tensor fixed =
        matrix_web_forward(fixed_window, fixed_weights, cfg, 1, false, &overflow);
    const RealTensor exact =
        float_oracle(window, weights, 1, false, Activation::kPassthrough, 1);
    const double err = std::abs(decode_raw(fixed.raws()[0], fmt) - exact.data[0]);
    sum += err;
    worst = std::max(worst, err);
  }

  ErrorSweepRow row;
  row.kernel = kernel;
  row.input_lo = range.lo;
  row.input_hi = range.hi;
  row.trials = trials;
  row.mean_abs_error = sum / static_cast<double>(trials);
  row.max_abs_error = worst;
  row.seed = seed;
  row.overflow_events = overflow.count();
  return row;
}

}  // namespace

std::vector<ErrorSweepRow> error_sweep(std::span<const std::uint32_t> kernels,
                                       std::span<const InputRange> ranges,
                                       std::uint64_t trials, std::uint64_t seed,
                                       const QFormat& fmt) {
  fmt.validate();
  if (trials == 0) {
    throw Error(ErrorCode::kInvalidInput, "error sweep needs trials >= 1");
  }
  for (const auto k : kernels) {
    if (k == 0) throw Error(ErrorCode::kInvalidInput, "kernel must be >= 1");
  }
  for (const auto& r : ranges) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      throw Error(ErrorCode::kRange, "invalid input range [" +
                                         std::to_string(r.lo) + ", " +
                                         std::to_string(r.hi) + "]");
    }
  }

  std::vector<std::future<ErrorSweepRow>> cells;
  for (const auto k : kernels) {
    for (std::size_t ri = 0; ri < ranges.size(); ++ri) {
      cells.push_back(std::async(std::launch::async, sweep_cell, k, ranges[ri],
                                 ri, trials, seed, fmt));
    }
  }
  std::vector<ErrorSweepRow> rows;
  rows.reserve(cells.size());
  for (auto& cell : cells) rows.push_back(cell.get());
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const ErrorSweepRow> rows) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "kernel,lo,hi,trials,mean_abs_error,max_abs_error,seed\n";
  for (const auto& row : rows) {
    os << row.kernel << ',' << std::setprecision(17) << row.input_lo << ','
       << row.input_hi << ',' << row.trials << ',' << row.mean_abs_error << ','
       << row.max_abs_error << ',' << row.seed << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace qfabric::analysis
