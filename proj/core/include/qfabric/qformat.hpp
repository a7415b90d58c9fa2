// SPDX-License-Identifier: Apache-2.0
//
// Signed Q-format fixed point. A value is stored as a two's-complement raw
// integer of `total_bits` width and means raw * 2^-frac_bits.
//
// Arithmetic policy:
//   - every result is re-quantized to the operand format immediately;
//   - overflow saturates to the format range;
//   - multiplication truncates toward -inf (arithmetic shift).
#pragma once

#include <cstdint>
#include <string>

namespace qfabric {

struct QFormat {
  int total_bits = 32;
  int frac_bits = 15;

  /// Q(int_bits, frac_bits) with one implicit sign bit.
  static constexpr QFormat q(int int_bits, int frac_bits) {
    return QFormat{int_bits + frac_bits + 1, frac_bits};
  }

  constexpr int integer_bits() const { return total_bits - 1 - frac_bits; }
  constexpr std::int64_t raw_min() const {
    return -(std::int64_t{1} << (total_bits - 1));
  }
  constexpr std::int64_t raw_max() const {
    return (std::int64_t{1} << (total_bits - 1)) - 1;
  }
  constexpr std::int64_t one_raw() const { return std::int64_t{1} << frac_bits; }

  double resolution() const;
  double min_value() const;
  double max_value() const;

  bool valid() const {
    return total_bits >= 3 && total_bits <= 32 && frac_bits >= 1 &&
           frac_bits <= total_bits - 2;
  }
  /// Throws Error(kInvalidInput) unless 3 <= total_bits <= 32 and
  /// 1 <= frac_bits <= total_bits - 2.
  void validate() const;

  bool operator==(const QFormat&) const = default;
};

/// Q(16,15): the 32-bit working format of the co-processor.
inline constexpr QFormat kDefaultFormat = QFormat::q(16, 15);

std::string to_string(const QFormat& fmt);

/// Counts saturation events. Not synchronized: one counter per run.
class OverflowCounter {
 public:
  void record(std::uint64_t n = 1) { count_ += n; }
  std::uint64_t count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  std::uint64_t count_ = 0;
};

// Raw-level kernels shared by the datapath. Inputs must already fit `fmt`.

inline std::int32_t saturate(std::int64_t wide, const QFormat& fmt,
                             OverflowCounter* overflow = nullptr) {
  if (wide > fmt.raw_max()) {
    if (overflow) overflow->record();
    return static_cast<std::int32_t>(fmt.raw_max());
  }
  if (wide < fmt.raw_min()) {
    if (overflow) overflow->record();
    return static_cast<std::int32_t>(fmt.raw_min());
  }
  return static_cast<std::int32_t>(wide);
}

inline std::int32_t add_raw(std::int32_t a, std::int32_t b, const QFormat& fmt,
                            OverflowCounter* overflow = nullptr) {
  return saturate(std::int64_t{a} + std::int64_t{b}, fmt, overflow);
}

inline std::int32_t mul_raw(std::int32_t a, std::int32_t b, const QFormat& fmt,
                            OverflowCounter* overflow = nullptr) {
  // |a*b| < 2^62, exact in 64 bits; >> on signed is arithmetic in C++20.
  const std::int64_t product = std::int64_t{a} * std::int64_t{b};
  return saturate(product >> fmt.frac_bits, fmt, overflow);
}

/// Saturating encode of a finite real: clamp(floor(x * 2^m)).
std::int32_t encode_raw(double x, const QFormat& fmt,
                        OverflowCounter* overflow = nullptr);
double decode_raw(std::int32_t raw, const QFormat& fmt);

class QValue {
 public:
  QValue() = default;

  /// Throws Error(kInvalidInput) if raw does not fit the format.
  static QValue from_raw(std::int64_t raw, const QFormat& fmt);

  std::int32_t raw() const { return raw_; }
  const QFormat& format() const { return format_; }

  bool operator==(const QValue&) const = default;

 private:
  QValue(std::int32_t raw, const QFormat& fmt) : raw_(raw), format_(fmt) {}

  std::int32_t raw_ = 0;
  QFormat format_ = kDefaultFormat;
};

/// Throws Error(kInvalidInput) for NaN or infinity.
QValue encode(double x, const QFormat& fmt = kDefaultFormat,
              OverflowCounter* overflow = nullptr);
double decode(const QValue& q);

// Binary operations throw Error(kFormatMismatch) when formats differ.
QValue q_add(const QValue& a, const QValue& b,
             OverflowCounter* overflow = nullptr);
QValue q_mul(const QValue& a, const QValue& b,
             OverflowCounter* overflow = nullptr);
QValue q_max(const QValue& a, const QValue& b);

}  // namespace qfabric
