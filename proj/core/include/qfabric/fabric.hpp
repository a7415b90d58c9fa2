// SPDX-License-Identifier: Apache-2.0
//
// Functional, bit-exact model of the Matrix Web: an array of Cell Body Units
// (CBUs) fed from one shared input stream. Each CBU holds one MAC unit per
// input plane; a MAC multiplies a k*k window by its weight cache and reduces
// the products through a zero-padded binary adder tree. MAC results are
// combined by a second tree, biased, activated and max-pooled.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qfabric/memory.hpp"
#include "qfabric/qformat.hpp"

namespace qfabric {

enum class Activation { kReLU, kSigmoid, kTanh, kPassthrough };

std::string_view to_string(Activation act);
/// Accepts relu, sigmoid, tanh, passthrough (case-insensitive); throws
/// Error(kInvalidInput) otherwise.
Activation parse_activation(std::string_view name);

struct FabricConfig {
  std::uint32_t d_in = 1;
  std::uint32_t kernel = 3;
  std::uint32_t num_filters = 1;  // number of CBUs
  std::uint32_t pool = 1;         // 1 disables pooling
  Activation activation = Activation::kReLU;
  QFormat format = kDefaultFormat;

  /// Throws Error(kConfiguration) on any zero parameter or bad format.
  void validate() const;

  bool operator==(const FabricConfig&) const = default;
};

struct OutputShape {
  std::uint32_t conv_width = 0;
  std::uint32_t conv_height = 0;
  std::uint32_t width = 0;   // after pooling
  std::uint32_t height = 0;  // after pooling

  bool operator==(const OutputShape&) const = default;
};

inline std::uint32_t padding_for(std::uint32_t kernel, bool zero_pad) {
  return zero_pad ? kernel / 2 : 0;
}

/// out = floor((in + 2*pad - k) / stride) + 1 per axis, then floor(out/pool).
/// Throws Error(kShape) when no window fits or pooling leaves nothing.
OutputShape output_shape(std::uint32_t in_width, std::uint32_t in_height,
                         std::uint32_t kernel, std::uint32_t stride,
                         bool zero_pad, std::uint32_t pool);

/// Sigmoid and tanh use 512 uniform linear segments over [-8, 8) with
/// fixed-point interpolation and clamp to their asymptotes outside.
class ActivationUnit {
 public:
  static constexpr int kSegments = 512;
  static constexpr int kRangeLo = -8;
  static constexpr int kRangeHi = 8;

  ActivationUnit(Activation act, const QFormat& fmt);

  std::int32_t apply(std::int32_t raw) const;
  Activation activation() const { return act_; }

 private:
  Activation act_;
  QFormat format_;
  std::int64_t lo_raw_ = 0;
  std::int64_t hi_raw_ = 0;
  std::int32_t below_ = 0;
  std::int32_t above_ = 0;
  std::vector<std::int32_t> table_;  // kSegments + 1 breakpoints
};

QValue apply_activation(const QValue& x, Activation act);

/// Reduces `leaves` in place. Size must be a power of two; layer by layer,
/// element j of the next layer is leaves[2j] + leaves[2j+1] (saturating).
std::int32_t reduce_tree(std::span<std::int32_t> leaves, const QFormat& fmt,
                         OverflowCounter* overflow = nullptr);

/// Pads with zeros to the next power of two and reduces. Throws
/// Error(kInvalidInput) on an empty list, Error(kFormatMismatch) on mixed
/// formats.
QValue adder_tree(std::span<const QValue> values,
                  OverflowCounter* overflow = nullptr);

/// Index-ordered products window[i] * weights[i], then adder_tree.
QValue mac_unit(std::span<const QValue> window, std::span<const QValue> weights,
                OverflowCounter* overflow = nullptr);

class CellBodyUnit {
 public:
  explicit CellBodyUnit(const FabricConfig& cfg);

  /// `weights` holds d_in * k * k raws in (r, i, j) order.
  void load(std::span<const std::int32_t> weights, std::int32_t bias);
  void flush();
  bool loaded() const { return bias_.has_value(); }

  const std::vector<std::vector<std::int32_t>>& weight_caches() const {
    return caches_;
  }
  std::optional<std::int32_t> bias() const { return bias_; }

  /// Produces one output plane (a depth-1 tensor).
  Tensor forward(const Tensor& input, std::uint32_t stride, bool zero_pad,
                 OverflowCounter* overflow = nullptr) const;

 private:
  FabricConfig cfg_;
  std::vector<std::vector<std::int32_t>> caches_;  // one per input plane
  std::optional<std::int32_t> bias_;
};

Tensor cbu_forward(const Tensor& input, std::span<const std::int32_t> weights,
                   std::int32_t bias, const FabricConfig& cfg,
                   std::uint32_t stride, bool zero_pad,
                   OverflowCounter* overflow = nullptr);

/// Runs every filter of `filters` on its own CBU over the shared input.
/// Output plane t is produced by filter t.
Tensor matrix_web_forward(const Tensor& input, const FilterSet& filters,
                          const FabricConfig& cfg, std::uint32_t stride,
                          bool zero_pad, OverflowCounter* overflow = nullptr);

}  // namespace qfabric
