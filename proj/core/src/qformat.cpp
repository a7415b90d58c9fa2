// SPDX-License-Identifier: Apache-2.0
#include "qfabric/qformat.hpp"

#include <cmath>

#include "qfabric/error.hpp"

namespace qfabric {

double QFormat::resolution() const { return std::ldexp(1.0, -frac_bits); }

double QFormat::min_value() const {
  return std::ldexp(static_cast<double>(raw_min()), -frac_bits);
}

double QFormat::max_value() const {
  return std::ldexp(static_cast<double>(raw_max()), -frac_bits);
}

void QFormat::validate() const {
  if (!valid()) {
    throw Error(ErrorCode::kInvalidInput,
                "invalid Q format: total_bits=" + std::to_string(total_bits) +
                    " frac_bits=" + std::to_string(frac_bits));
  }
}

std::string to_string(const QFormat& fmt) {
  return "Q(" + std::to_string(fmt.integer_bits()) + "," +
         std::to_string(fmt.frac_bits) + ")";
}

std::int32_t encode_raw(double x, const QFormat& fmt,
                        OverflowCounter* overflow) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kInvalidInput, "cannot encode a non-finite value");
  }
  // Scaling by a power of two is exact unless it overflows to inf, which the
  // clamp below handles.
  const double scaled = std::floor(std::ldexp(x, fmt.frac_bits));
  if (scaled > static_cast<double>(fmt.raw_max())) {
    if (overflow) overflow->record();
    return static_cast<std::int32_t>(fmt.raw_max());
  }
  if (scaled < static_cast<double>(fmt.raw_min())) {
    if (overflow) overflow->record();
    return static_cast<std::int32_t>(fmt.raw_min());
  }
  return static_cast<std::int32_t>(scaled);
}

double decode_raw(std::int32_t raw, const QFormat& fmt) {
  return std::ldexp(static_cast<double>(raw), -fmt.frac_bits);
}

QValue QValue::from_raw(std::int64_t raw, const QFormat& fmt) {
  fmt.validate();
  if (raw < fmt.raw_min() || raw > fmt.raw_max()) {
    throw Error(ErrorCode::kInvalidInput,
                "raw value " + std::to_string(raw) + " does not fit " +
                    to_string(fmt));
  }
  return QValue(static_cast<std::int32_t>(raw), fmt);
}

QValue encode(double x, const QFormat& fmt, OverflowCounter* overflow) {
  fmt.validate();
  return QValue::from_raw(encode_raw(x, fmt, overflow), fmt);
}

double decode(const QValue& q) { return decode_raw(q.raw(), q.format()); }

namespace {

void require_same_format(const QValue& a, const QValue& b) {
  if (a.format() != b.format()) {
    throw Error(ErrorCode::kFormatMismatch,
                "operand formats differ: " + to_string(a.format()) + " vs " +
                    to_string(b.format()));
  }
}

}  // namespace

QValue q_add(const QValue& a, const QValue& b, OverflowCounter* overflow) {
  require_same_format(a, b);
  return QValue::from_raw(add_raw(a.raw(), b.raw(), a.format(), overflow),
                          a.format());
}

QValue q_mul(const QValue& a, const QValue& b, OverflowCounter* overflow) {
  require_same_format(a, b);
  return QValue::from_raw(mul_raw(a.raw(), b.raw(), a.format(), overflow),
                          a.format());
}

QValue q_max(const QValue& a, const QValue& b) {
  require_same_format(a, b);
  return a.raw() >= b.raw() ? a : b;
}

}  // namespace qfabric
