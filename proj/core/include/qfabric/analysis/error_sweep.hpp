// SPDX-License-Identifier: Apache-2.0
//
// Fixed-vs-float error harness. For each (kernel, input range) cell, random
// k*k windows with inputs uniform in [lo, hi] and weights uniform in [-1, 1]
// run through a single-plane CBU (bias 0, passthrough activation, no pooling)
// and through a double-precision convolution on the same unquantized draws.
// The error of a trial is |decode(fixed) - float| at its one output point.
#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "qfabric/qformat.hpp"

namespace qfabric::analysis {

struct InputRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct ErrorSweepRow {
  std::uint32_t kernel = 0;
  double input_lo = 0.0;
  double input_hi = 0.0;
  std::uint64_t trials = 0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t overflow_events = 0;
};

/// Rows come back kernel-major in argument order. Each cell draws from its
/// own stream seeded by (seed, kernel, range index), so rows are computed
/// concurrently without affecting results. Throws Error(kRange) when
/// lo > hi or a bound is not finite, Error(kInvalidInput) when trials == 0
/// or a kernel is 0.
std::vector<ErrorSweepRow> error_sweep(std::span<const std::uint32_t> kernels,
                                       std::span<const InputRange> ranges,
                                       std::uint64_t trials, std::uint64_t seed,
                                       const QFormat& fmt = kDefaultFormat);

/// Header: kernel,lo,hi,trials,mean_abs_error,max_abs_error,seed
void write_sweep_csv(std::ostream& os, std::span<const ErrorSweepRow> rows);

}  // namespace qfabric::analysis
