// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "qfabric/error.hpp"
#include "qfabric/qformat.hpp"

namespace qfabric {
namespace {

constexpr int kCases = 2000;

QValue raw(std::int64_t r, const QFormat& fmt = kDefaultFormat) {
  return QValue::from_raw(r, fmt);
}

// Floor division written without shifts, used as the multiply oracle.
std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

TEST(QFormat, DefaultLayout) {
  EXPECT_EQ(kDefaultFormat.total_bits, 32);
  EXPECT_EQ(kDefaultFormat.frac_bits, 15);
  EXPECT_EQ(kDefaultFormat.integer_bits(), 16);
  EXPECT_EQ(to_string(kDefaultFormat), "Q(16,15)");
  EXPECT_DOUBLE_EQ(kDefaultFormat.resolution(), std::ldexp(1.0, -15));
  EXPECT_DOUBLE_EQ(kDefaultFormat.min_value(), -65536.0);
  EXPECT_DOUBLE_EQ(kDefaultFormat.max_value(), 65536.0 - std::ldexp(1.0, -15));
}

TEST(QFormat, Validity) {
  EXPECT_TRUE((QFormat{16, 8}).valid());
  EXPECT_TRUE((QFormat{8, 6}).valid());
  EXPECT_FALSE((QFormat{32, 31}).valid());
  EXPECT_FALSE((QFormat{32, 0}).valid());
  EXPECT_FALSE((QFormat{33, 15}).valid());
  EXPECT_EQ(code_of([] { (QFormat{8, 7}).validate(); }), ErrorCode::kInvalidInput);
}

TEST(Encode, Examples) {
  EXPECT_EQ(encode(0.5).raw(), 16384);
  EXPECT_EQ(encode(-1.0).raw(), -32768);
  EXPECT_EQ(encode(70000.0).raw(), std::numeric_limits<std::int32_t>::max());
  EXPECT_EQ(encode(-70000.0).raw(), std::numeric_limits<std::int32_t>::min());
  // Truncation is toward negative infinity.
  EXPECT_EQ(encode(-std::ldexp(1.0, -17)).raw(), -1);
  EXPECT_EQ(encode(std::ldexp(1.0, -17)).raw(), 0);
}

TEST(Encode, SaturationIsCounted) {
  OverflowCounter ovf;
  encode(1.0, kDefaultFormat, &ovf);
  EXPECT_EQ(ovf.count(), 0u);
  encode(1e9, kDefaultFormat, &ovf);
  encode(-1e9, kDefaultFormat, &ovf);
  EXPECT_EQ(ovf.count(), 2u);
  ovf.reset();
  EXPECT_EQ(ovf.count(), 0u);
}

TEST(Encode, NonFiniteRejected) {
  EXPECT_EQ(code_of([] { encode(std::nan("")); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { encode(std::numeric_limits<double>::infinity()); }),
            ErrorCode::kInvalidInput);
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode(raw(32768)), 1.0);
  EXPECT_EQ(decode(raw(1)), std::ldexp(1.0, -15));
  EXPECT_EQ(decode(raw(-32768)), -1.0);
}

TEST(QValue, RawMustFit) {
  const QFormat q8{8, 4};
  EXPECT_NO_THROW(raw(127, q8));
  EXPECT_EQ(code_of([&] { raw(128, q8); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { raw(-129, q8); }), ErrorCode::kInvalidInput);
}

TEST(Add, Examples) {
  EXPECT_EQ(q_add(encode(0.5), encode(0.25)).raw(), 24576);
  const QValue max = raw(kDefaultFormat.raw_max());
  OverflowCounter ovf;
  EXPECT_EQ(q_add(max, max, &ovf).raw(), kDefaultFormat.raw_max());
  EXPECT_EQ(ovf.count(), 1u);
}

TEST(Mul, Examples) {
  EXPECT_EQ(q_mul(encode(0.5), encode(0.5)).raw(), 8192);
  EXPECT_EQ(q_mul(raw(1), raw(1)).raw(), 0);
  EXPECT_EQ(q_mul(raw(-1), raw(1)).raw(), -1);
  EXPECT_EQ(q_mul(encode(300.0), encode(300.0)).raw(), kDefaultFormat.raw_max());
}

TEST(Max, Examples) {
  EXPECT_EQ(q_max(encode(0.25), encode(0.75)), encode(0.75));
  EXPECT_EQ(q_max(encode(-1.0), encode(0.0)), encode(0.0));
  EXPECT_EQ(q_max(encode(3.0), encode(3.0)), encode(3.0));
}

TEST(Ops, FormatMismatch) {
  const QValue a = encode(1.0);
  const QValue b = encode(1.0, QFormat{16, 8});
  EXPECT_EQ(code_of([&] { q_add(a, b); }), ErrorCode::kFormatMismatch);
  EXPECT_EQ(code_of([&] { q_mul(a, b); }), ErrorCode::kFormatMismatch);
  EXPECT_EQ(code_of([&] { q_max(a, b); }), ErrorCode::kFormatMismatch);
}

std::vector<QFormat> formats() {
  return {kDefaultFormat, QFormat{16, 8}, QFormat{8, 6}, QFormat{24, 12},
          QFormat{32, 30}, QFormat{3, 1}};
}

TEST(Property, EncodeRoundTripWithinResolution) {
  testing::Gen gen(11);
  for (const auto& fmt : formats()) {
    for (int i = 0; i < kCases; ++i) {
      const double x = gen.real(fmt.min_value(), fmt.max_value());
      const double back = decode(encode(x, fmt));
      EXPECT_LE(back, x);
      EXPECT_LT(x - back, fmt.resolution()) << to_string(fmt) << " x=" << x;
    }
  }
}

TEST(Property, EncodeMonotone) {
  testing::Gen gen(12);
  for (const auto& fmt : formats()) {
    const double span = 2.0 * std::max(-fmt.min_value(), fmt.max_value());
    for (int i = 0; i < kCases; ++i) {
      double a = gen.real(-span, span);
      double b = gen.real(-span, span);
      if (a > b) std::swap(a, b);
      EXPECT_LE(encode(a, fmt).raw(), encode(b, fmt).raw());
    }
  }
}

TEST(Property, CommutativeAndDeterministic) {
  testing::Gen gen(13);
  for (int i = 0; i < kCases; ++i) {
    const QValue a = raw(static_cast<std::int32_t>(gen.bits()));
    const QValue b = raw(static_cast<std::int32_t>(gen.bits()));
    EXPECT_EQ(q_add(a, b), q_add(b, a));
    EXPECT_EQ(q_mul(a, b), q_mul(b, a));
    EXPECT_EQ(q_max(a, b), q_max(b, a));
    EXPECT_EQ(q_mul(a, b), q_mul(a, b));
  }
}

TEST(Property, ExactAddWhenNotSaturating) {
  testing::Gen gen(14);
  for (const auto& fmt : formats()) {
    for (int i = 0; i < kCases; ++i) {
      const QValue a = raw(gen.range(fmt.raw_min(), fmt.raw_max()), fmt);
      const QValue b = raw(gen.range(fmt.raw_min(), fmt.raw_max()), fmt);
      OverflowCounter ovf;
      const QValue sum = q_add(a, b, &ovf);
      const double exact = decode(a) + decode(b);
      if (ovf.count() == 0) {
        EXPECT_EQ(decode(sum), exact);
      } else {
        EXPECT_EQ(sum.raw(), exact > 0 ? fmt.raw_max() : fmt.raw_min());
      }
    }
  }
}

TEST(Property, MultiplyMatchesFloorDivisionOracle) {
  testing::Gen gen(15);
  for (const auto& fmt : formats()) {
    for (int i = 0; i < kCases; ++i) {
      const std::int64_t ra = gen.range(fmt.raw_min(), fmt.raw_max());
      const std::int64_t rb = gen.range(fmt.raw_min(), fmt.raw_max());
      const std::int64_t expected = std::clamp(
          floor_div(ra * rb, std::int64_t{1} << fmt.frac_bits), fmt.raw_min(),
          fmt.raw_max());
      EXPECT_EQ(q_mul(raw(ra, fmt), raw(rb, fmt)).raw(), expected);
    }
  }
}

TEST(Property, MultiplyTruncatesDownByLessThanResolution) {
  testing::Gen gen(16);
  for (int i = 0; i < kCases; ++i) {
    // Magnitudes below 256 keep the product inside Q(16,15).
    const QValue a = encode(gen.real(-255.0, 255.0));
    const QValue b = encode(gen.real(-255.0, 255.0));
    OverflowCounter ovf;
    const double got = decode(q_mul(a, b, &ovf));
    ASSERT_EQ(ovf.count(), 0u);
    const double exact = decode(a) * decode(b);
    EXPECT_LE(got, exact);
    EXPECT_LT(exact - got, kDefaultFormat.resolution());
  }
}

TEST(Property, AddIdentityAndMulIdentity) {
  testing::Gen gen(17);
  const QValue zero = encode(0.0);
  const QValue one = encode(1.0);
  for (int i = 0; i < kCases; ++i) {
    const QValue x = raw(static_cast<std::int32_t>(gen.bits()));
    EXPECT_EQ(q_add(x, zero), x);
    EXPECT_EQ(q_mul(x, one), x);
    EXPECT_EQ(q_max(x, x), x);
  }
}

}  // namespace
}  // namespace qfabric
