// SPDX-License-Identifier: Apache-2.0
#include "qfabric/fabric.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "qfabric/error.hpp"

namespace qfabric {

void FabricConfig::validate() const {
  if (d_in == 0 || kernel == 0 || num_filters == 0 || pool == 0) {
    throw Error(ErrorCode::kConfiguration,
                "fabric parameters d_in, kernel, num_filters and pool must be "
                ">= 1 (got d_in=" +
                    std::to_string(d_in) + " kernel=" + std::to_string(kernel) +
                    " num_filters=" + std::to_string(num_filters) +
                    " pool=" + std::to_string(pool) + ")");
  }
  if (!format.valid()) {
    throw Error(ErrorCode::kConfiguration,
                "fabric format " + to_string(format) + " is invalid");
  }
}

OutputShape output_shape(std::uint32_t in_width, std::uint32_t in_height,
                         std::uint32_t kernel, std::uint32_t stride,
                         bool zero_pad, std::uint32_t pool) {
  if (kernel == 0 || stride == 0 || pool == 0) {
    throw Error(ErrorCode::kInvalidInput, "kernel, stride and pool must be >= 1");
  }
  const std::uint64_t pad = padding_for(kernel, zero_pad);
  const std::uint64_t padded_w = in_width + 2 * pad;
  const std::uint64_t padded_h = in_height + 2 * pad;
  if (padded_w < kernel || padded_h < kernel) {
    throw Error(ErrorCode::kShape,
                "kernel " + std::to_string(kernel) + " exceeds padded input " +
                    std::to_string(padded_w) + "x" + std::to_string(padded_h));
  }
  OutputShape shape;
  shape.conv_width = static_cast<std::uint32_t>((padded_w - kernel) / stride + 1);
  shape.conv_height = static_cast<std::uint32_t>((padded_h - kernel) / stride + 1);
  shape.width = shape.conv_width / pool;
  shape.height = shape.conv_height / pool;
  if (shape.width == 0 || shape.height == 0) {
    throw Error(ErrorCode::kShape,
                "pool " + std::to_string(pool) + " exceeds convolution output " +
                    std::to_string(shape.conv_width) + "x" +
                    std::to_string(shape.conv_height));
  }
  return shape;
}

std::int32_t reduce_tree(std::span<std::int32_t> leaves, const QFormat& fmt,
                         OverflowCounter* overflow) {
  if (leaves.empty() || !std::has_single_bit(leaves.size())) {
    throw Error(ErrorCode::kInvalidInput,
                "adder tree needs a power-of-two number of leaves");
  }
  for (std::size_t width = leaves.size(); width > 1; width /= 2) {
    for (std::size_t j = 0; j < width / 2; ++j) {
      leaves[j] = add_raw(leaves[2 * j], leaves[2 * j + 1], fmt, overflow);
    }
  }
  return leaves[0];
}

QValue adder_tree(std::span<const QValue> values, OverflowCounter* overflow) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidInput, "adder tree over an empty list");
  }
  const QFormat fmt = values.front().format();
  std::vector<std::int32_t> leaves(std::bit_ceil(values.size()), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].format() != fmt) {
      throw Error(ErrorCode::kFormatMismatch, "adder tree over mixed formats");
    }
    leaves[i] = values[i].raw();
  }
  return QValue::from_raw(reduce_tree(leaves, fmt, overflow), fmt);
}

QValue mac_unit(std::span<const QValue> window, std::span<const QValue> weights,
                OverflowCounter* overflow) {
  if (window.size() != weights.size()) {
    throw Error(ErrorCode::kSize,
                "MAC window has " + std::to_string(window.size()) +
                    " values, weight cache " + std::to_string(weights.size()));
  }
  std::vector<QValue> products;
  products.reserve(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    products.push_back(q_mul(window[i], weights[i], overflow));
  }
  return adder_tree(products, overflow);
}

CellBodyUnit::CellBodyUnit(const FabricConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
}

void CellBodyUnit::load(std::span<const std::int32_t> weights,
                        std::int32_t bias) {
  const std::size_t per_plane = std::size_t{cfg_.kernel} * cfg_.kernel;
  if (weights.size() != per_plane * cfg_.d_in) {
    throw Error(ErrorCode::kSize,
                "CBU expects " + std::to_string(per_plane * cfg_.d_in) +
                    " weights, got " + std::to_string(weights.size()));
  }
  caches_.assign(cfg_.d_in, {});
  for (std::uint32_t r = 0; r < cfg_.d_in; ++r) {
    caches_[r].assign(weights.begin() + r * per_plane,
                      weights.begin() + (r + 1) * per_plane);
  }
  bias_ = bias;
}

void CellBodyUnit::flush() {
  caches_.clear();
  bias_.reset();
}

Tensor CellBodyUnit::forward(const Tensor& input, std::uint32_t stride,
                             bool zero_pad, OverflowCounter* overflow) const {
  if (!loaded()) {
    throw Error(ErrorCode::kConfiguration, "CBU weight caches are empty");
  }
  if (input.depth() != cfg_.d_in) {
    throw Error(ErrorCode::kConfiguration,
                "input depth " + std::to_string(input.depth()) +
                    " does not match d_in " + std::to_string(cfg_.d_in));
  }
  if (input.format() != cfg_.format) {
    throw Error(ErrorCode::kFormatMismatch, "input format differs from fabric");
  }
  const QFormat& fmt = cfg_.format;
  const std::uint32_t k = cfg_.kernel;
  const OutputShape shape = output_shape(input.width(), input.height(), k,
                                         stride, zero_pad, cfg_.pool);
  const std::int64_t pad = padding_for(k, zero_pad);
  const ActivationUnit activation(cfg_.activation, fmt);

  std::vector<std::int32_t> products(std::bit_ceil(std::size_t{k} * k));
  std::vector<std::int32_t> planes(std::bit_ceil(std::size_t{cfg_.d_in}));
  std::vector<std::int32_t> conv(std::size_t{shape.conv_width} * shape.conv_height);

  for (std::uint32_t oy = 0; oy < shape.conv_height; ++oy) {
    for (std::uint32_t ox = 0; ox < shape.conv_width; ++ox) {
      const std::int64_t y0 = std::int64_t{oy} * stride - pad;
      const std::int64_t x0 = std::int64_t{ox} * stride - pad;
      std::fill(planes.begin(), planes.end(), 0);
      for (std::uint32_t r = 0; r < cfg_.d_in; ++r) {
        const auto& cache = caches_[r];
        std::fill(products.begin(), products.end(), 0);
        for (std::uint32_t i = 0; i < k; ++i) {
          const std::int64_t y = y0 + i;
          if (y < 0 || y >= input.height()) continue;
          for (std::uint32_t j = 0; j < k; ++j) {
            const std::int64_t x = x0 + j;
            if (x < 0 || x >= input.width()) continue;
            products[i * k + j] =
                mul_raw(input.raw(r, static_cast<std::uint32_t>(y),
                                  static_cast<std::uint32_t>(x)),
                        cache[i * k + j], fmt, overflow);
          }
        }
        planes[r] = reduce_tree(products, fmt, overflow);
      }
      const std::int32_t sum = reduce_tree(planes, fmt, overflow);
      conv[std::size_t{oy} * shape.conv_width + ox] =
          activation.apply(add_raw(sum, *bias_, fmt, overflow));
    }
  }

  Tensor out(shape.width, shape.height, 1, fmt);
  const std::uint32_t p = cfg_.pool;
  for (std::uint32_t py = 0; py < shape.height; ++py) {
    for (std::uint32_t px = 0; px < shape.width; ++px) {
      std::int32_t best = conv[std::size_t{py} * p * shape.conv_width + px * p];
      for (std::uint32_t dy = 0; dy < p; ++dy) {
        for (std::uint32_t dx = 0; dx < p; ++dx) {
          best = std::max(
              best, conv[std::size_t{py * p + dy} * shape.conv_width + px * p + dx]);
        }
      }
      out.raws()[std::size_t{py} * shape.width + px] = best;
    }
  }
  return out;
}

Tensor cbu_forward(const Tensor& input, std::span<const std::int32_t> weights,
                   std::int32_t bias, const FabricConfig& cfg,
                   std::uint32_t stride, bool zero_pad,
                   OverflowCounter* overflow) {
  CellBodyUnit cbu(cfg);
  cbu.load(weights, bias);
  return cbu.forward(input, stride, zero_pad, overflow);
}

Tensor matrix_web_forward(const Tensor& input, const FilterSet& filters,
                          const FabricConfig& cfg, std::uint32_t stride,
                          bool zero_pad, OverflowCounter* overflow) {
  cfg.validate();
  filters.validate();
  if (filters.num_filters > cfg.num_filters) {
    throw Error(ErrorCode::kConfiguration,
                std::to_string(filters.num_filters) + " filters exceed " +
                    std::to_string(cfg.num_filters) + " CBUs");
  }
  if (filters.depth != cfg.d_in || filters.kernel != cfg.kernel) {
    throw Error(ErrorCode::kConfiguration,
                "filter set shape (depth " + std::to_string(filters.depth) +
                    ", kernel " + std::to_string(filters.kernel) +
                    ") does not match fabric");
  }
  if (filters.format != cfg.format) {
    throw Error(ErrorCode::kFormatMismatch, "filter format differs from fabric");
  }

  // Crossbar: every CBU sees the identical input.
  std::vector<Tensor> planes;
  planes.reserve(filters.num_filters);
  for (std::uint32_t t = 0; t < filters.num_filters; ++t) {
    planes.push_back(cbu_forward(input, filters.filter_weights(t),
                                 filters.biases[t], cfg, stride, zero_pad,
                                 overflow));
  }
  const std::uint32_t w = planes.front().width();
  const std::uint32_t h = planes.front().height();
  std::vector<std::int32_t> raws;
  raws.reserve(std::size_t{w} * h * planes.size());
  for (const Tensor& plane : planes) {
    raws.insert(raws.end(), plane.raws().begin(), plane.raws().end());
  }
  return Tensor(w, h, filters.num_filters, cfg.format, std::move(raws));
}

}  // namespace qfabric
