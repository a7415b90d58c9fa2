// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fabric_cases.hpp"
#include "qfabric/analysis/cost_model.hpp"
#include "qfabric/analysis/error_sweep.hpp"
#include "qfabric/analysis/oracles.hpp"
#include "qfabric/error.hpp"

namespace qfabric::analysis {
namespace {

using qfabric::testing::Gen;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

// Literal evaluations of the closed forms in floating point.
std::uint64_t adders_literal(double k, double d) {
  double mac = 0.0;
  for (int r = 0; r <= static_cast<int>(std::ceil(2.0 * std::log2(k))); ++r) mac += std::pow(2.0, r);
  double depth = 0.0;
  for (int p = 0; p <= static_cast<int>(std::ceil(std::log2(d))); ++p) depth += std::pow(2.0, p);
  return static_cast<std::uint64_t>(d * mac + depth);
}

std::uint64_t fetch_literal(double gamma, double d) {
  return static_cast<std::uint64_t>(gamma + (d + 2.0) * gamma + 1.0);
}

std::uint32_t depth_literal(double k, double d) {
  const double leaves = std::pow(2.0, std::ceil(std::log2(k * k)));
  const double planes = std::pow(2.0, std::ceil(std::log2(d)));
  return static_cast<std::uint32_t>(std::ceil(std::log2(leaves)) + std::ceil(std::log2(planes)) + 2);
}

// Window positions counted by sliding, not by formula.
std::uint64_t positions(std::uint32_t in, std::uint32_t k, std::uint32_t stride, bool zp) {
  const std::int64_t padded = in + 2 * std::int64_t{padding_for(k, zp)};
  std::uint64_t n = 0;
  for (std::int64_t start = 0; start + k <= padded; start += stride) ++n;
  return n;
}

TEST(CostModel, FrozenExamples) {
  EXPECT_EQ(multipliers_per_mac(3), 9u);
  EXPECT_EQ(multipliers_per_cbu(3, 3), 27u);
  EXPECT_EQ(multipliers_per_cbu(1, 1), 1u);
  EXPECT_EQ(adders_per_cbu(3, 1), 32u);
  EXPECT_EQ(adders_per_cbu(4, 3), 100u);
  EXPECT_EQ(adders_per_cbu(1, 1), 2u);
  EXPECT_EQ(fetch_cycles(16, 1), 65u);
  EXPECT_EQ(fetch_cycles(16, 3), 97u);
  EXPECT_EQ(fetch_cycles(1, 1), 5u);
  EXPECT_EQ(dsp_per_cbu(3, 1), 36u);
  EXPECT_EQ(dsp_per_cbu(9, 3), 972u);
  EXPECT_EQ(dsp_per_cbu(5, 1), 100u);
  EXPECT_EQ(pipeline_depth(3, 1), 6u);
  EXPECT_EQ(ops_per_cycle(16, 1, 3), 288u);
}

TEST(CostModel, MatchesLiteralFormulas) {
  for (std::uint32_t k = 1; k <= 16; ++k) {
    for (std::uint32_t d = 1; d <= 16; ++d) {
      EXPECT_EQ(adders_per_cbu(k, d), adders_literal(k, d)) << k << "," << d;
      EXPECT_EQ(multipliers_per_cbu(k, d), std::uint64_t{d} * k * k);
      EXPECT_EQ(pipeline_depth(k, d), depth_literal(k, d)) << k << "," << d;
    }
  }
  for (std::uint32_t g = 1; g <= 64; ++g)
    for (std::uint32_t d = 1; d <= 8; ++d) EXPECT_EQ(fetch_cycles(g, d), fetch_literal(g, d));
}

TEST(CostModel, ReferenceTableReproduced) {
  const auto rows = reference_cbu_utilization();
  ASSERT_EQ(rows.size(), 14u);
  for (const auto& row : rows) EXPECT_EQ(dsp_per_cbu(row.kernel, row.d_in), row.dsp);
}

TEST(CostModel, CycleModel) {
  FabricConfig cfg;
  cfg.num_filters = 16;
  const CycleEstimate est = cycle_model(cfg, 224, 224, 1, true);
  EXPECT_EQ(est.fetch, 65u);
  EXPECT_EQ(est.weight_load, 160u);
  EXPECT_EQ(est.compute, 224u * 224u + 6u);
  EXPECT_EQ(est.total, est.fetch + est.weight_load + est.compute);
  EXPECT_EQ(cycle_model(cfg, 3, 3, 1, false).compute, 7u);

  Gen gen(71);
  for (int i = 0; i < 500; ++i) {
    FabricConfig c;
    c.kernel = gen.urange(1, 9);
    c.d_in = gen.urange(1, 8);
    c.num_filters = gen.urange(1, 32);
    const std::uint32_t stride = gen.urange(1, 4);
    const bool zp = gen.coin();
    const std::uint32_t w = gen.urange(c.kernel, 64);
    const std::uint32_t h = gen.urange(c.kernel, 64);
    const CycleEstimate e = cycle_model(c, w, h, stride, zp);
    EXPECT_EQ(e.compute, positions(w, c.kernel, stride, zp) * positions(h, c.kernel, stride, zp) +
                             depth_literal(c.kernel, c.d_in));
    EXPECT_EQ(e.weight_load, std::uint64_t{c.num_filters} * (c.d_in * c.kernel * c.kernel + 1));
  }
}

TEST(CostModel, DomainErrors) {
  EXPECT_EQ(code_of([] { adders_per_cbu(0, 1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { fetch_cycles(0, 1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { dsp_per_cbu(3, 0); }), ErrorCode::kInvalidInput);
}

TEST(CostModel, CsvHeaders) {
  std::ostringstream res, cyc;
  const ResourceRow r{3, 1};
  write_resources_csv(res, std::span(&r, 1));
  EXPECT_EQ(res.str(), "k,d_in,multipliers,adders,dsp\n3,1,9,32,36\n");
  FabricConfig cfg;
  cfg.num_filters = 16;
  const CycleRow c{16, 1, 3, cycle_model(cfg, 3, 3, 1, false)};
  write_cycles_csv(cyc, std::span(&c, 1));
  EXPECT_EQ(cyc.str(), "gamma,d_in,k,fetch,weight_load,compute,total\n16,1,3,65,160,7,232\n");
}

TEST(FloatOracle, Examples) {
  RealTensor in(3, 3, 1);
  for (int i = 0; i < 9; ++i) in.data[i] = i + 1;
  RealFilterSet f{1, 1, 3, std::vector<double>(9, 1.0), {0.0}};
  EXPECT_EQ(float_oracle(in, f, 1, false, Activation::kReLU, 1).data, std::vector<double>{45.0});

  Gen gen(72);
  const Tensor t = gen.tensor(5, 4, 1, -3, 3);
  const RealTensor id = float_oracle(t, testing::identity_filter(1, 3, 0), 1, true,
                                     Activation::kPassthrough, 1);
  EXPECT_EQ(id.data, to_real(t).data);
}

TEST(FixedOracle, Examples) {
  Gen gen(73);
  const Tensor t = gen.tensor(5, 4, 1, -3, 3);
  EXPECT_EQ(fixed_reference_oracle(t, testing::identity_filter(1, 3, 0), 1, true,
                                   Activation::kPassthrough, 1),
            t);
  for (const Activation act : testing::all_activations()) {
    FilterSet zero(1, 2, 3);
    zero.biases[0] = encode_raw(0.75, kDefaultFormat);
    const Tensor out = fixed_reference_oracle(gen.tensor(4, 4, 2, -9, 9), zero, 1, false, act, 1);
    const std::int32_t expected = apply_activation(encode(0.75), act).raw();
    for (const auto v : out.raws()) EXPECT_EQ(v, expected) << to_string(act);
  }
}

TEST(FixedOracle, AgreesWithFloatWithinBound) {
  Gen gen(74);
  for (int i = 0; i < 200; ++i) {
    testing::CaseLimits lim;
    lim.max_pool = 1;
    testing::FabricCase c = testing::random_case(gen, lim);
    c.input = gen.tensor(c.input.width(), c.input.height(), c.cfg.d_in, -4, 4);
    c.filters = gen.filters(c.filters.num_filters, c.cfg.d_in, c.cfg.kernel, 1, 1);
    OverflowCounter ovf;
    const Tensor fixed = testing::run(c, &ovf);
    ASSERT_EQ(ovf.count(), 0u);
    const RealTensor exact = float_oracle(c.input, c.filters, c.stride, c.zero_pad,
                                          c.cfg.activation, 1);
    // The activation table adds at most 1e-3; the fabric's Lipschitz-1
    // activations cannot amplify the MAC error.
    const double bound = c.cfg.d_in * c.cfg.kernel * c.cfg.kernel * std::ldexp(1.0, -15) + 1e-3;
    for (std::size_t j = 0; j < exact.data.size(); ++j) {
      ASSERT_LE(std::abs(decode_raw(fixed.raws()[j], kDefaultFormat) - exact.data[j]), bound)
          << c.describe();
    }
  }
}

TEST(ErrorSweep, DeterministicAndRowIndependent) {
  const std::vector<std::uint32_t> kernels{3, 5, 7};
  const std::vector<InputRange> ranges{{0, 1}, {0, 10}};
  const auto a = error_sweep(kernels, ranges, 200, 9);
  const auto b = error_sweep(kernels, ranges, 200, 9);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_abs_error, b[i].mean_abs_error);
    EXPECT_EQ(a[i].max_abs_error, b[i].max_abs_error);
    EXPECT_LE(a[i].mean_abs_error, a[i].max_abs_error);
    EXPECT_EQ(a[i].trials, 200u);
    EXPECT_EQ(a[i].seed, 9u);
  }
  const std::uint32_t five[] = {5};
  const auto alone = error_sweep(five, ranges, 200, 9);
  EXPECT_EQ(alone[1].mean_abs_error, a[3].mean_abs_error);
  const auto other_seed = error_sweep(five, ranges, 200, 10);
  EXPECT_NE(other_seed[0].mean_abs_error, alone[0].mean_abs_error);
}

TEST(ErrorSweep, Examples) {
  const std::uint32_t nine[] = {9};
  const InputRange zero[] = {{0, 0}};
  EXPECT_EQ(error_sweep(nine, zero, 100, 1)[0].mean_abs_error, 0.0);
  const InputRange unit[] = {{0, 1}};
  EXPECT_LE(error_sweep(nine, unit, 1000, 1)[0].mean_abs_error, 81 * std::ldexp(1.0, -15));
  const InputRange bad[] = {{1, 0}};
  EXPECT_EQ(code_of([&] { error_sweep(nine, bad, 100, 1); }), ErrorCode::kRange);
  EXPECT_EQ(code_of([&] { error_sweep(nine, unit, 0, 1); }), ErrorCode::kInvalidInput);
}

TEST(ErrorSweep, CsvFormat) {
  ErrorSweepRow row;
  row.kernel = 3;
  row.input_lo = 0;
  row.input_hi = 50;
  row.trials = 1000;
  row.mean_abs_error = 0.25;
  row.max_abs_error = 0.5;
  row.seed = 7;
  std::ostringstream os;
  write_sweep_csv(os, std::span(&row, 1));
  EXPECT_EQ(os.str(), "kernel,lo,hi,trials,mean_abs_error,max_abs_error,seed\n"
                      "3,0,50,1000,0.25,0.5,7\n");
}

}  // namespace
}  // namespace qfabric::analysis
