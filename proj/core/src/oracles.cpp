// SPDX-License-Identifier: Apache-2.0
#include "qfabric/analysis/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfabric/error.hpp"

namespace qfabric::analysis {

namespace {

struct Geometry {
  std::uint32_t pad = 0;
  std::uint32_t conv_w = 0;
  std::uint32_t conv_h = 0;
  std::uint32_t out_w = 0;
  std::uint32_t out_h = 0;
};

Geometry geometry(std::uint32_t in_w, std::uint32_t in_h, std::uint32_t k,
                  std::uint32_t stride, bool zero_pad, std::uint32_t pool) {
  if (k == 0 || stride == 0 || pool == 0) {
    throw Error(ErrorCode::kInvalidInput, "kernel, stride and pool must be >= 1");
  }
  Geometry g;
  g.pad = zero_pad ? k / 2 : 0;
  const std::uint64_t pw = std::uint64_t{in_w} + 2 * g.pad;
  const std::uint64_t ph = std::uint64_t{in_h} + 2 * g.pad;
  if (pw < k || ph < k) {
    throw Error(ErrorCode::kShape, "kernel larger than padded input");
  }
  g.conv_w = static_cast<std::uint32_t>((pw - k) / stride + 1);
  g.conv_h = static_cast<std::uint32_t>((ph - k) / stride + 1);
  g.out_w = g.conv_w / pool;
  g.out_h = g.conv_h / pool;
  if (g.out_w == 0 || g.out_h == 0) {
    throw Error(ErrorCode::kShape, "pooling window larger than output");
  }
  return g;
}

void check_shapes(std::uint32_t input_depth, std::uint32_t filter_depth) {
  if (input_depth != filter_depth) {
    throw Error(ErrorCode::kShape, "input depth " + std::to_string(input_depth) +
                                       " vs filter depth " +
                                       std::to_string(filter_depth));
  }
}

// ---- fixed-point restatement --------------------------------------------

struct Fixed {
  int m;
  std::int64_t lo;
  std::int64_t hi;

  explicit Fixed(const QFormat& f)
      : m(f.frac_bits),
        lo(-(std::int64_t{1} << (f.total_bits - 1))),
        hi((std::int64_t{1} << (f.total_bits - 1)) - 1) {}

  std::int64_t clamp(std::int64_t v) const { return v < lo ? lo : (v > hi ? hi : v); }
  std::int64_t add(std::int64_t a, std::int64_t b) const { return clamp(a + b); }
  std::int64_t mul(std::int64_t a, std::int64_t b) const {
    const std::int64_t p = a * b;
    // floor(p / 2^m) without relying on shift semantics.
    const std::int64_t d = std::int64_t{1} << m;
    std::int64_t q = p / d;
    if (p % d != 0 && p < 0) --q;
    return clamp(q);
  }
  std::int64_t quantize(double v) const {
    const double s = std::floor(std::ldexp(v, m));
    if (s >= static_cast<double>(hi)) return hi;
    if (s <= static_cast<double>(lo)) return lo;
    return static_cast<std::int64_t>(s);
  }

  // Binary tree over `n` leaves padded with zeros up to a power of two.
  std::int64_t tree(const std::vector<std::int64_t>& leaves) const {
    std::size_t width = 1;
    while (width < leaves.size()) width *= 2;
    return subtree(leaves, 0, width);
  }
  std::int64_t subtree(const std::vector<std::int64_t>& leaves,
                       std::size_t first, std::size_t width) const {
    if (width == 1) return first < leaves.size() ? leaves[first] : 0;
    return add(subtree(leaves, first, width / 2),
               subtree(leaves, first + width / 2, width / 2));
  }

  std::int64_t breakpoint(Activation act, std::int64_t s) const {
    const double x = -8.0 + static_cast<double>(s) / 32.0;
    const double y = act == Activation::kSigmoid ? 1.0 / (1.0 + std::exp(-x))
                                                 : std::tanh(x);
    return quantize(y);
  }

  std::int64_t activate(Activation act, std::int64_t v) const {
    if (act == Activation::kPassthrough) return v;
    if (act == Activation::kReLU) return v > 0 ? v : 0;
    const std::int64_t one = std::int64_t{1} << m;
    if (v < -8 * one) return act == Activation::kSigmoid ? 0 : quantize(-1.0);
    if (v >= 8 * one) return quantize(1.0);
    const std::int64_t scaled = (v + 8 * one) * 32;  // non-negative
    const std::int64_t s = scaled / one;
    const std::int64_t frac = scaled - s * one;
    const std::int64_t y0 = breakpoint(act, s);
    const std::int64_t y1 = breakpoint(act, s + 1);
    const std::int64_t num = (y1 - y0) * frac;
    std::int64_t step = num / one;
    if (num % one != 0 && num < 0) --step;
    return y0 + step;
  }
};

double activate_real(Activation act, double v) {
  switch (act) {
    case Activation::kReLU: return v > 0.0 ? v : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::kTanh: return std::tanh(v);
    case Activation::kPassthrough: return v;
  }
  return v;
}

}  // namespace

RealTensor to_real(const Tensor& tensor) {
  RealTensor out(tensor.width(), tensor.height(), tensor.depth());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = decode_raw(tensor.raws()[i], tensor.format());
  }
  return out;
}

RealFilterSet to_real(const FilterSet& filters) {
  RealFilterSet out;
  out.num_filters = filters.num_filters;
  out.depth = filters.depth;
  out.kernel = filters.kernel;
  for (const auto raw : filters.weights) {
    out.weights.push_back(decode_raw(raw, filters.format));
  }
  for (const auto raw : filters.biases) {
    out.biases.push_back(decode_raw(raw, filters.format));
  }
  return out;
}

RealTensor float_oracle(const RealTensor& input, const RealFilterSet& filters,
                        std::uint32_t stride, bool zero_pad,
                        Activation activation, std::uint32_t pool) {
  check_shapes(input.depth, filters.depth);
  const std::uint32_t k = filters.kernel;
  const Geometry g = geometry(input.width, input.height, k, stride, zero_pad, pool);
  RealTensor out(g.out_w, g.out_h, filters.num_filters);
  std::vector<double> conv(std::size_t{g.conv_w} * g.conv_h);
  for (std::uint32_t t = 0; t < filters.num_filters; ++t) {
    for (std::uint32_t oy = 0; oy < g.conv_h; ++oy) {
      for (std::uint32_t ox = 0; ox < g.conv_w; ++ox) {
        double acc = 0.0;
        for (std::uint32_t r = 0; r < filters.depth; ++r) {
          for (std::uint32_t i = 0; i < k; ++i) {
            for (std::uint32_t j = 0; j < k; ++j) {
              const std::int64_t y = std::int64_t{oy} * stride + i - g.pad;
              const std::int64_t x = std::int64_t{ox} * stride + j - g.pad;
              if (y < 0 || x < 0 || y >= input.height || x >= input.width) continue;
              acc += filters.weight(t, r, i, j) *
                     input.at(r, static_cast<std::uint32_t>(y),
                              static_cast<std::uint32_t>(x));
            }
          }
        }
        conv[std::size_t{oy} * g.conv_w + ox] =
            activate_real(activation, acc + filters.biases[t]);
      }
    }
    for (std::uint32_t py = 0; py < g.out_h; ++py) {
      for (std::uint32_t px = 0; px < g.out_w; ++px) {
        double best = conv[std::size_t{py * pool} * g.conv_w + px * pool];
        for (std::uint32_t dy = 0; dy < pool; ++dy) {
          for (std::uint32_t dx = 0; dx < pool; ++dx) {
            best = std::max(best, conv[std::size_t{py * pool + dy} * g.conv_w +
                                       px * pool + dx]);
          }
        }
        out.at(t, py, px) = best;
      }
    }
  }
  return out;
}

RealTensor float_oracle(const Tensor& input, const FilterSet& filters,
                        std::uint32_t stride, bool zero_pad,
                        Activation activation, std::uint32_t pool) {
  return float_oracle(to_real(input), to_real(filters), stride, zero_pad,
                      activation, pool);
}

Tensor fixed_reference_oracle(const Tensor& input, const FilterSet& filters,
                              std::uint32_t stride, bool zero_pad,
                              Activation activation, std::uint32_t pool) {
  check_shapes(input.depth(), filters.depth);
  if (input.format() != filters.format) {
    throw Error(ErrorCode::kFormatMismatch, "input and filter formats differ");
  }
  const Fixed fx(input.format());
  const std::uint32_t k = filters.kernel;
  const std::uint32_t d = filters.depth;
  const Geometry g = geometry(input.width(), input.height(), k, stride, zero_pad, pool);

  // Materialize the zero-padded input once.
  const std::uint32_t pw = input.width() + 2 * g.pad;
  const std::uint32_t ph = input.height() + 2 * g.pad;
  std::vector<std::int64_t> padded(std::size_t{pw} * ph * d, 0);
  for (std::uint32_t r = 0; r < d; ++r) {
    for (std::uint32_t y = 0; y < input.height(); ++y) {
      for (std::uint32_t x = 0; x < input.width(); ++x) {
        padded[(std::size_t{r} * ph + y + g.pad) * pw + x + g.pad] = input.raw(r, y, x);
      }
    }
  }

  std::vector<std::int32_t> result;
  result.reserve(std::size_t{g.out_w} * g.out_h * filters.num_filters);
  std::vector<std::int64_t> conv(std::size_t{g.conv_w} * g.conv_h);
  for (std::uint32_t t = 0; t < filters.num_filters; ++t) {
    for (std::uint32_t oy = 0; oy < g.conv_h; ++oy) {
      for (std::uint32_t ox = 0; ox < g.conv_w; ++ox) {
        std::vector<std::int64_t> mac_results;
        for (std::uint32_t r = 0; r < d; ++r) {
          std::vector<std::int64_t> products;
          for (std::uint32_t i = 0; i < k; ++i) {
            for (std::uint32_t j = 0; j < k; ++j) {
              const std::int64_t v =
                  padded[(std::size_t{r} * ph + oy * stride + i) * pw + ox * stride + j];
              const std::int64_t w =
                  filters.weights[((std::size_t{t} * d + r) * k + i) * k + j];
              products.push_back(fx.mul(v, w));
            }
          }
          mac_results.push_back(fx.tree(products));
        }
        const std::int64_t biased = fx.add(fx.tree(mac_results), filters.biases[t]);
        conv[std::size_t{oy} * g.conv_w + ox] = fx.activate(activation, biased);
      }
    }
    for (std::uint32_t py = 0; py < g.out_h; ++py) {
      for (std::uint32_t px = 0; px < g.out_w; ++px) {
        std::int64_t best = fx.lo;
        for (std::uint32_t dy = 0; dy < pool; ++dy) {
          for (std::uint32_t dx = 0; dx < pool; ++dx) {
            best = std::max(best, conv[std::size_t{py * pool + dy} * g.conv_w +
                                       px * pool + dx]);
          }
        }
        result.push_back(static_cast<std::int32_t>(best));
      }
    }
  }
  return Tensor(g.out_w, g.out_h, filters.num_filters, input.format(),
                std::move(result));
}

}  // namespace qfabric::analysis
