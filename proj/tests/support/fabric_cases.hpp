// SPDX-License-Identifier: Apache-2.0
// Randomized fabric instances and the algebraic laws checked against them.
#pragma once

#include <algorithm>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "qfabric/analysis/oracles.hpp"
#include "qfabric/fabric.hpp"

namespace qfabric::testing {

struct FabricCase {
  FabricConfig cfg;
  Tensor input;
  FilterSet filters;
  std::uint32_t stride = 1;
  bool zero_pad = false;

  std::string describe() const {
    std::ostringstream os;
    os << "k=" << cfg.kernel << " d=" << cfg.d_in << " n=" << filters.num_filters
       << " pool=" << cfg.pool << " act=" << to_string(cfg.activation)
       << " stride=" << stride << " zp=" << zero_pad << " in=" << input.width()
       << "x" << input.height();
    return os.str();
  }
};

struct CaseLimits {
  std::uint32_t max_kernel = 9;
  std::uint32_t max_depth = 4;
  std::uint32_t max_stride = 3;
  std::uint32_t max_pool = 3;
  std::uint32_t max_filters = 3;
  std::uint32_t extra_size = 6;  // spatial slack beyond the minimum
};

// Smallest input extent that still yields `pool` conv outputs.
inline std::uint32_t min_extent(std::uint32_t k, std::uint32_t stride, bool zp,
                                std::uint32_t pool) {
  const std::int64_t need = std::int64_t{k} - 2 * std::int64_t{padding_for(k, zp)} +
                            std::int64_t{pool - 1} * stride;
  return static_cast<std::uint32_t>(std::max<std::int64_t>(need, 1));
}

inline FabricCase random_case(Gen& gen, const CaseLimits& lim = {}) {
  FabricCase c;
  c.cfg.kernel = gen.urange(1, lim.max_kernel);
  c.cfg.d_in = gen.urange(1, lim.max_depth);
  c.cfg.pool = gen.urange(1, lim.max_pool);
  c.cfg.activation = gen.pick(all_activations());
  c.cfg.num_filters = gen.urange(1, lim.max_filters);
  c.stride = gen.urange(1, lim.max_stride);
  c.zero_pad = gen.coin();
  const std::uint32_t lo = min_extent(c.cfg.kernel, c.stride, c.zero_pad, c.cfg.pool);
  const std::uint32_t w = gen.urange(lo, lo + lim.extra_size);
  const std::uint32_t h = gen.urange(lo, lo + lim.extra_size);

  // Mix small magnitudes with ones large enough to saturate.
  static const std::vector<double> magnitudes{1.0, 4.0, 64.0, 2000.0, 65535.0};
  const double in_mag = gen.pick(magnitudes);
  const double w_mag = gen.pick(magnitudes);
  c.input = gen.tensor(w, h, c.cfg.d_in, -in_mag, in_mag);
  c.filters = gen.filters(gen.urange(1, c.cfg.num_filters), c.cfg.d_in, c.cfg.kernel,
                          std::min(w_mag, 8.0), std::min(in_mag, 8.0));
  return c;
}

inline Tensor run(const FabricCase& c, OverflowCounter* ovf = nullptr) {
  return matrix_web_forward(c.input, c.filters, c.cfg, c.stride, c.zero_pad, ovf);
}

inline Tensor zero_padded(const Tensor& t, std::uint32_t rings) {
  Tensor out(t.width() + 2 * rings, t.height() + 2 * rings, t.depth(), t.format());
  for (std::uint32_t r = 0; r < t.depth(); ++r)
    for (std::uint32_t y = 0; y < t.height(); ++y)
      for (std::uint32_t x = 0; x < t.width(); ++x)
        out.set_raw(r, y + rings, x + rings, t.raw(r, y, x));
  return out;
}

inline Tensor max_pool(const Tensor& t, std::uint32_t p) {
  Tensor out(t.width() / p, t.height() / p, t.depth(), t.format());
  for (std::uint32_t r = 0; r < t.depth(); ++r)
    for (std::uint32_t y = 0; y < out.height(); ++y)
      for (std::uint32_t x = 0; x < out.width(); ++x) {
        std::int32_t best = t.raw(r, y * p, x * p);
        for (std::uint32_t dy = 0; dy < p; ++dy)
          for (std::uint32_t dx = 0; dx < p; ++dx)
            best = std::max(best, t.raw(r, y * p + dy, x * p + dx));
        out.set_raw(r, y, x, best);
      }
  return out;
}

// Centre tap of every plane set to one, Passthrough, stride 1, ZP on.
inline bool identity_law(Gen& gen) {
  FabricConfig cfg;
  cfg.kernel = gen.urange(1, 9);
  cfg.d_in = gen.urange(1, 4);
  cfg.pool = 1;
  cfg.activation = Activation::kPassthrough;
  const Tensor input = gen.tensor(gen.urange(1, 10), gen.urange(1, 10), cfg.d_in, -100, 100);
  FilterSet f(1, cfg.d_in, cfg.kernel);
  for (std::uint32_t r = 0; r < cfg.d_in; ++r)
    f.weights[f.weight_index(0, r, cfg.kernel / 2, cfg.kernel / 2)] =
        static_cast<std::int32_t>(cfg.format.one_raw());
  const Tensor out = matrix_web_forward(input, f, cfg, 1, true);
  // Even kernels grow the output by one row and column of zeros.
  const std::uint32_t grow = cfg.kernel % 2 == 0 ? 1 : 0;
  if (out.width() != input.width() + grow || out.height() != input.height() + grow)
    return false;
  for (std::uint32_t y = 0; y < out.height(); ++y)
    for (std::uint32_t x = 0; x < out.width(); ++x) {
      std::int64_t sum = 0;
      if (y < input.height() && x < input.width())
        for (std::uint32_t r = 0; r < cfg.d_in; ++r) sum += input.raw(r, y, x);
      if (out.raw(0, y, x) != sum) return false;
    }
  return true;
}

inline bool zero_pad_law(Gen& gen) {
  FabricCase c = random_case(gen);
  c.zero_pad = true;
  const Tensor with_zp = run(c);
  FabricCase pre = c;
  pre.zero_pad = false;
  pre.input = zero_padded(c.input, padding_for(c.cfg.kernel, true));
  return run(pre) == with_zp;
}

inline bool stride_law(Gen& gen) {
  FabricCase c = random_case(gen);
  c.cfg.pool = 1;
  const Tensor strided = run(c);
  FabricCase unit = c;
  unit.stride = 1;
  const Tensor dense = run(unit);
  for (std::uint32_t r = 0; r < strided.depth(); ++r)
    for (std::uint32_t y = 0; y < strided.height(); ++y)
      for (std::uint32_t x = 0; x < strided.width(); ++x)
        if (strided.raw(r, y, x) != dense.raw(r, y * c.stride, x * c.stride)) return false;
  return true;
}

// pool = 1 is the pre-pooling output: pooling it externally reproduces
// every pooled configuration.
inline bool pool_one_law(Gen& gen) {
  FabricCase c = random_case(gen);
  const std::uint32_t pool = c.cfg.pool;
  c.cfg.pool = 1;
  const Tensor pre = run(c);
  const Tensor oracle_pre = analysis::fixed_reference_oracle(
      c.input, c.filters, c.stride, c.zero_pad, c.cfg.activation, 1);
  if (pre != oracle_pre) return false;
  if (max_pool(pre, 1) != pre) return false;
  c.cfg.pool = pool;
  return run(c) == max_pool(pre, pool);
}

}  // namespace qfabric::testing
