// SPDX-License-Identifier: Apache-2.0
//
// Main-memory model, feature/weight containers, and their on-disk formats.
//
// Layout conventions:
//   Tensor   channel-planar, row-major inside a plane:
//            index(r, y, x) = r*height*width + y*width + x
//   Filters  (t, r, i, j): filter, input plane, kernel row, kernel column.
//   Memory   raws are little-endian int32, one per 4-byte word.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qfabric/qformat.hpp"

namespace qfabric {

inline constexpr std::size_t kWordBytes = 4;

struct AddressSpace {
  std::uint64_t base = 0;
  std::uint64_t length = 0;  // bytes

  std::uint64_t end() const { return base + length; }
  std::uint64_t words() const { return length / kWordBytes; }
  bool overlaps(const AddressSpace& other) const {
    return length != 0 && other.length != 0 && base < other.end() &&
           other.base < end();
  }

  bool operator==(const AddressSpace&) const = default;
};

class MemoryImage {
 public:
  explicit MemoryImage(std::size_t size_bytes) : bytes_(size_bytes) {}

  std::size_t size() const { return bytes_.size(); }

  /// Throws Error(kAddress) unless [base, base+length) lies in memory, and
  /// Error(kSize) when length is not a whole number of words.
  void check(const AddressSpace& space) const;

  std::span<const std::byte> view(const AddressSpace& space) const;
  std::span<std::byte> view(const AddressSpace& space);

  std::vector<std::int32_t> load_words(const AddressSpace& space) const;
  void store_words(const AddressSpace& space,
                   std::span<const std::int32_t> words);

  std::span<const std::byte> bytes() const { return bytes_; }

 private:
  std::vector<std::byte> bytes_;
};

/// Bulk copy with snapshot semantics (overlapping ranges behave as if the
/// source were read completely before the destination is written).
void dma_copy(MemoryImage& mem, const AddressSpace& src,
              const AddressSpace& dst);

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::uint32_t width, std::uint32_t height, std::uint32_t depth,
         const QFormat& fmt = kDefaultFormat);
  /// Takes ownership of `raws`; validates length and per-raw range.
  Tensor(std::uint32_t width, std::uint32_t height, std::uint32_t depth,
         const QFormat& fmt, std::vector<std::int32_t> raws);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint32_t depth() const { return depth_; }
  const QFormat& format() const { return format_; }
  std::size_t size() const { return data_.size(); }
  std::size_t byte_size() const { return data_.size() * kWordBytes; }

  std::size_t index(std::uint32_t r, std::uint32_t y, std::uint32_t x) const {
    return (static_cast<std::size_t>(r) * height_ + y) * width_ + x;
  }
  std::int32_t raw(std::uint32_t r, std::uint32_t y, std::uint32_t x) const {
    return data_[index(r, y, x)];
  }
  void set_raw(std::uint32_t r, std::uint32_t y, std::uint32_t x,
               std::int32_t raw);
  QValue at(std::uint32_t r, std::uint32_t y, std::uint32_t x) const;

  std::span<const std::int32_t> raws() const { return data_; }
  std::span<std::int32_t> raws() { return data_; }
  std::span<const std::int32_t> plane(std::uint32_t r) const;

  bool operator==(const Tensor&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint32_t depth_ = 0;
  QFormat format_ = kDefaultFormat;
  std::vector<std::int32_t> data_;
};

struct FilterSet {
  std::uint32_t num_filters = 0;
  std::uint32_t depth = 0;
  std::uint32_t kernel = 0;
  QFormat format = kDefaultFormat;
  std::vector<std::int32_t> weights;  // (t, r, i, j)
  std::vector<std::int32_t> biases;   // one per filter

  FilterSet() = default;
  FilterSet(std::uint32_t num_filters, std::uint32_t depth,
            std::uint32_t kernel, const QFormat& fmt = kDefaultFormat);

  std::size_t weights_per_filter() const {
    return static_cast<std::size_t>(depth) * kernel * kernel;
  }
  std::size_t weight_index(std::uint32_t t, std::uint32_t r, std::uint32_t i,
                           std::uint32_t j) const {
    return ((static_cast<std::size_t>(t) * depth + r) * kernel + i) * kernel +
           j;
  }
  std::span<const std::int32_t> filter_weights(std::uint32_t t) const;

  /// Filters [first, first+count) as a standalone set.
  FilterSet slice(std::uint32_t first, std::uint32_t count) const;

  /// Throws Error(kInvalidInput) on a broken shape or out-of-range raw.
  void validate() const;

  bool operator==(const FilterSet&) const = default;
};

Tensor read_tensor(const MemoryImage& mem, const AddressSpace& space,
                   std::uint32_t width, std::uint32_t height,
                   std::uint32_t depth, const QFormat& fmt);
void write_tensor(MemoryImage& mem, const AddressSpace& space,
                  const Tensor& tensor);

// File formats ("QTNS" tensors, "QWGT" filter sets), version 1.
inline constexpr std::uint32_t kFileVersion = 1;

std::vector<std::byte> serialize_tensor(const Tensor& tensor);
Tensor parse_tensor(std::span<const std::byte> bytes);
std::vector<std::byte> serialize_filters(const FilterSet& filters);
FilterSet parse_filters(std::span<const std::byte> bytes);

void save_tensor_file(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor_file(const std::filesystem::path& path);
void save_filter_file(const std::filesystem::path& path,
                      const FilterSet& filters);
FilterSet load_filter_file(const std::filesystem::path& path);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);

}  // namespace qfabric
