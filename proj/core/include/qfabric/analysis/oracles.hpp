// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations used to check the fabric.
//
// float_oracle            the convolution layer in double precision with
//                         exact sigmoid/tanh.
// fixed_reference_oracle  a straight-line scalar restatement of the fabric's
//                         quantization schedule. It deliberately shares no
//                         code with fabric.cpp so the two can be compared
//                         raw-for-raw.
#pragma once

#include <cstdint>
#include <vector>

#include "qfabric/fabric.hpp"
#include "qfabric/memory.hpp"

namespace qfabric::analysis {

struct RealTensor {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t depth = 0;
  std::vector<double> data;  // planar, like Tensor

  RealTensor() = default;
  RealTensor(std::uint32_t w, std::uint32_t h, std::uint32_t d)
      : width(w), height(h), depth(d), data(std::size_t{w} * h * d, 0.0) {}

  double& at(std::uint32_t r, std::uint32_t y, std::uint32_t x) {
    return data[(std::size_t{r} * height + y) * width + x];
  }
  double at(std::uint32_t r, std::uint32_t y, std::uint32_t x) const {
    return data[(std::size_t{r} * height + y) * width + x];
  }
};

struct RealFilterSet {
  std::uint32_t num_filters = 0;
  std::uint32_t depth = 0;
  std::uint32_t kernel = 0;
  std::vector<double> weights;  // (t, r, i, j)
  std::vector<double> biases;

  double weight(std::uint32_t t, std::uint32_t r, std::uint32_t i,
                std::uint32_t j) const {
    return weights[((std::size_t{t} * depth + r) * kernel + i) * kernel + j];
  }
};

RealTensor to_real(const Tensor& tensor);
RealFilterSet to_real(const FilterSet& filters);

/// Convolution + bias + activation + max pooling in double precision, with
/// the fabric's padding, stride and pooling conventions.
RealTensor float_oracle(const RealTensor& input, const RealFilterSet& filters,
                        std::uint32_t stride, bool zero_pad,
                        Activation activation, std::uint32_t pool);

/// Same, on decoded fixed-point operands.
RealTensor float_oracle(const Tensor& input, const FilterSet& filters,
                        std::uint32_t stride, bool zero_pad,
                        Activation activation, std::uint32_t pool);

Tensor fixed_reference_oracle(const Tensor& input, const FilterSet& filters,
                              std::uint32_t stride, bool zero_pad,
                              Activation activation, std::uint32_t pool);

}  // namespace qfabric::analysis
