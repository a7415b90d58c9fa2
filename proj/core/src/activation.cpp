// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "qfabric/error.hpp"
#include "qfabric/fabric.hpp"

namespace qfabric {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kReLU: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kPassthrough: return "passthrough";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "relu") return Activation::kReLU;
  if (lower == "sigmoid") return Activation::kSigmoid;
  if (lower == "tanh") return Activation::kTanh;
  if (lower == "passthrough" || lower == "none") return Activation::kPassthrough;
  throw Error(ErrorCode::kInvalidInput,
              "unknown activation '" + std::string(name) + "'");
}

ActivationUnit::ActivationUnit(Activation act, const QFormat& fmt)
    : act_(act), format_(fmt) {
  fmt.validate();
  if (act != Activation::kSigmoid && act != Activation::kTanh) return;

  const auto fn = [act](double x) {
    return act == Activation::kSigmoid ? 1.0 / (1.0 + std::exp(-x))
                                       : std::tanh(x);
  };
  lo_raw_ = std::int64_t{kRangeLo} << fmt.frac_bits;
  hi_raw_ = std::int64_t{kRangeHi} << fmt.frac_bits;
  below_ = encode_raw(act == Activation::kSigmoid ? 0.0 : -1.0, fmt);
  above_ = encode_raw(1.0, fmt);
  table_.resize(kSegments + 1);
  const double step = double(kRangeHi - kRangeLo) / kSegments;
  for (int s = 0; s <= kSegments; ++s) {
    table_[s] = encode_raw(fn(kRangeLo + s * step), fmt);
  }
}

std::int32_t ActivationUnit::apply(std::int32_t raw) const {
  switch (act_) {
    case Activation::kPassthrough: return raw;
    case Activation::kReLU: return std::max(raw, std::int32_t{0});
    case Activation::kSigmoid:
    case Activation::kTanh: break;
  }
  if (raw < lo_raw_) return below_;
  if (raw >= hi_raw_) return above_;
  // Position in units of 2^-m segments.
  constexpr int kSegmentsPerUnit = kSegments / (kRangeHi - kRangeLo);
  const std::int64_t pos = (raw - lo_raw_) * kSegmentsPerUnit;
  const std::int64_t seg = pos >> format_.frac_bits;
  const std::int64_t frac = pos & (format_.one_raw() - 1);
  const std::int64_t y0 = table_[seg];
  const std::int64_t y1 = table_[seg + 1];
  return static_cast<std::int32_t>(y0 + (((y1 - y0) * frac) >> format_.frac_bits));
}

QValue apply_activation(const QValue& x, Activation act) {
  using Key = std::tuple<int, int, int>;
  static std::mutex mu;
  static std::map<Key, ActivationUnit> units;
  const Key key{static_cast<int>(act), x.format().total_bits,
                x.format().frac_bits};
  std::int32_t raw;
  {
    std::lock_guard lock(mu);
    auto it = units.find(key);
    if (it == units.end()) {
      it = units.emplace(key, ActivationUnit(act, x.format())).first;
    }
    raw = it->second.apply(x.raw());
  }
  return QValue::from_raw(raw, x.format());
}

}  // namespace qfabric
