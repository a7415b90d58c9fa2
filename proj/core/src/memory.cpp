// SPDX-License-Identifier: Apache-2.0
#include "qfabric/memory.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <string>
#include <utility>

#include "qfabric/error.hpp"

namespace qfabric {

namespace {

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
  }
}

std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= std::to_integer<std::uint32_t>(in[offset + b]) << (8 * b);
  }
  return v;
}

void store_le(std::span<std::byte> out, std::int32_t raw) {
  const auto v = static_cast<std::uint32_t>(raw);
  for (int b = 0; b < 4; ++b) {
    out[b] = static_cast<std::byte>((v >> (8 * b)) & 0xFFu);
  }
}

std::int32_t load_le(std::span<const std::byte> in) {
  return static_cast<std::int32_t>(get_u32(in, 0));
}

void check_raws_fit(std::span<const std::int32_t> raws, const QFormat& fmt,
                    const char* what) {
  for (const std::int32_t raw : raws) {
    if (raw < fmt.raw_min() || raw > fmt.raw_max()) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string(what) + ": raw " + std::to_string(raw) +
                      " does not fit " + to_string(fmt));
    }
  }
}

// Cursor over a byte buffer; every read past the end is a truncation.
class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view magic) {
    if (bytes_.size() < magic.size()) {
      throw Error(ErrorCode::kTruncated, "file shorter than its magic");
    }
    for (std::size_t i = 0; i < magic.size(); ++i) {
      if (std::to_integer<char>(bytes_[i]) != magic[i]) {
        throw Error(ErrorCode::kBadMagic,
                    "expected magic \"" + std::string(magic) + "\"");
      }
    }
    pos_ = magic.size();
  }

  std::uint32_t u32(const char* field) {
    if (bytes_.size() - pos_ < 4) {
      throw Error(ErrorCode::kTruncated,
                  std::string("header ends before field ") + field);
    }
    const std::uint32_t v = get_u32(bytes_, pos_);
    pos_ += 4;
    return v;
  }

  std::vector<std::int32_t> raws(std::size_t count, const char* what) {
    if ((bytes_.size() - pos_) / 4 < count) {
      throw Error(ErrorCode::kTruncated,
                  std::string(what) + ": expected " + std::to_string(count) +
                      " values, payload holds " +
                      std::to_string((bytes_.size() - pos_) / 4));
    }
    std::vector<std::int32_t> out(count);
    for (auto& raw : out) {
      raw = load_le(bytes_.subspan(pos_, 4));
      pos_ += 4;
    }
    return out;
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw Error(ErrorCode::kMalformedFile,
                  std::to_string(bytes_.size() - pos_) +
                      " trailing bytes after payload");
    }
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

// Element count from header dimensions; an unrepresentable product can never
// be backed by a real payload, so it reports as truncation.
std::size_t element_count(std::initializer_list<std::uint32_t> dims) {
  std::uint64_t count = 1;
  for (const std::uint32_t d : dims) {
    if (d != 0 && count > (std::uint64_t{1} << 62) / d) {
      throw Error(ErrorCode::kTruncated, "declared shape exceeds any payload");
    }
    count *= d;
  }
  return static_cast<std::size_t>(count);
}

QFormat read_format(Reader& reader) {
  QFormat fmt;
  fmt.total_bits = static_cast<int>(reader.u32("total_bits"));
  fmt.frac_bits = static_cast<int>(reader.u32("frac_bits"));
  if (!fmt.valid()) {
    throw Error(ErrorCode::kMalformedFile,
                "header declares an invalid Q format");
  }
  return fmt;
}

void read_version(Reader& reader) {
  const std::uint32_t version = reader.u32("version");
  if (version != kFileVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "file version " + std::to_string(version) + ", expected " +
                    std::to_string(kFileVersion));
  }
}

void put_magic(std::vector<std::byte>& out, std::string_view magic) {
  for (const char c : magic) out.push_back(static_cast<std::byte>(c));
}

}  // namespace

void MemoryImage::check(const AddressSpace& space) const {
  if (space.base > bytes_.size() || space.length > bytes_.size() - space.base) {
    throw Error(ErrorCode::kAddress,
                "address space [" + std::to_string(space.base) + ", " +
                    std::to_string(space.end()) + ") exceeds memory of " +
                    std::to_string(bytes_.size()) + " bytes");
  }
  if (space.length % kWordBytes != 0) {
    throw Error(ErrorCode::kSize, "address space length " +
                                      std::to_string(space.length) +
                                      " is not a multiple of 4");
  }
}

std::span<const std::byte> MemoryImage::view(const AddressSpace& space) const {
  check(space);
  return std::span<const std::byte>(bytes_).subspan(space.base, space.length);
}

std::span<std::byte> MemoryImage::view(const AddressSpace& space) {
  check(space);
  return std::span<std::byte>(bytes_).subspan(space.base, space.length);
}

std::vector<std::int32_t> MemoryImage::load_words(
    const AddressSpace& space) const {
  const auto bytes = view(space);
  std::vector<std::int32_t> out(space.words());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = load_le(bytes.subspan(i * kWordBytes, kWordBytes));
  }
  return out;
}

void MemoryImage::store_words(const AddressSpace& space,
                              std::span<const std::int32_t> words) {
  if (words.size() != space.words()) {
    throw Error(ErrorCode::kSize,
                "storing " + std::to_string(words.size()) + " words into a " +
                    std::to_string(space.length) + "-byte space");
  }
  auto bytes = view(space);
  for (std::size_t i = 0; i < words.size(); ++i) {
    store_le(bytes.subspan(i * kWordBytes, kWordBytes), words[i]);
  }
}

void dma_copy(MemoryImage& mem, const AddressSpace& src,
              const AddressSpace& dst) {
  if (src.length != dst.length) {
    throw Error(ErrorCode::kSize,
                "dma length mismatch: " + std::to_string(src.length) + " vs " +
                    std::to_string(dst.length));
  }
  const auto from = std::as_const(mem).view(src);
  auto to = mem.view(dst);
  if (src.base == dst.base || src.length == 0) return;
  std::memmove(to.data(), from.data(), from.size());
}

Tensor::Tensor(std::uint32_t width, std::uint32_t height, std::uint32_t depth,
               const QFormat& fmt)
    : width_(width),
      height_(height),
      depth_(depth),
      format_(fmt),
      data_(static_cast<std::size_t>(width) * height * depth, 0) {
  fmt.validate();
}

Tensor::Tensor(std::uint32_t width, std::uint32_t height, std::uint32_t depth,
               const QFormat& fmt, std::vector<std::int32_t> raws)
    : width_(width),
      height_(height),
      depth_(depth),
      format_(fmt),
      data_(std::move(raws)) {
  fmt.validate();
  if (data_.size() != static_cast<std::size_t>(width) * height * depth) {
    throw Error(ErrorCode::kSize,
                "tensor of " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(depth) +
                    " given " + std::to_string(data_.size()) + " values");
  }
  check_raws_fit(data_, format_, "tensor");
}

void Tensor::set_raw(std::uint32_t r, std::uint32_t y, std::uint32_t x,
                     std::int32_t raw) {
  if (raw < format_.raw_min() || raw > format_.raw_max()) {
    throw Error(ErrorCode::kInvalidInput, "raw does not fit tensor format");
  }
  data_[index(r, y, x)] = raw;
}

QValue Tensor::at(std::uint32_t r, std::uint32_t y, std::uint32_t x) const {
  return QValue::from_raw(raw(r, y, x), format_);
}

std::span<const std::int32_t> Tensor::plane(std::uint32_t r) const {
  const std::size_t plane_size = static_cast<std::size_t>(width_) * height_;
  return std::span<const std::int32_t>(data_).subspan(r * plane_size,
                                                      plane_size);
}

FilterSet::FilterSet(std::uint32_t num_filters_, std::uint32_t depth_,
                     std::uint32_t kernel_, const QFormat& fmt)
    : num_filters(num_filters_),
      depth(depth_),
      kernel(kernel_),
      format(fmt),
      weights(static_cast<std::size_t>(num_filters_) * depth_ * kernel_ *
                  kernel_,
              0),
      biases(num_filters_, 0) {}

std::span<const std::int32_t> FilterSet::filter_weights(std::uint32_t t) const {
  return std::span<const std::int32_t>(weights).subspan(
      t * weights_per_filter(), weights_per_filter());
}

FilterSet FilterSet::slice(std::uint32_t first, std::uint32_t count) const {
  if (first + count > num_filters) {
    throw Error(ErrorCode::kInvalidInput, "filter slice out of range");
  }
  FilterSet out(count, depth, kernel, format);
  const std::size_t per = weights_per_filter();
  std::copy_n(weights.begin() + first * per, count * per, out.weights.begin());
  std::copy_n(biases.begin() + first, count, out.biases.begin());
  return out;
}

void FilterSet::validate() const {
  format.validate();
  if (num_filters == 0 || depth == 0 || kernel == 0) {
    throw Error(ErrorCode::kInvalidInput,
                "filter set needs num_filters, depth and kernel >= 1");
  }
  if (weights.size() != num_filters * weights_per_filter() ||
      biases.size() != num_filters) {
    throw Error(ErrorCode::kSize, "filter set payload does not match shape");
  }
  check_raws_fit(weights, format, "weights");
  check_raws_fit(biases, format, "biases");
}

Tensor read_tensor(const MemoryImage& mem, const AddressSpace& space,
                   std::uint32_t width, std::uint32_t height,
                   std::uint32_t depth, const QFormat& fmt) {
  const std::uint64_t expected =
      kWordBytes * static_cast<std::uint64_t>(width) * height * depth;
  if (space.length != expected) {
    throw Error(ErrorCode::kSize,
                "tensor needs " + std::to_string(expected) +
                    " bytes, address space holds " +
                    std::to_string(space.length));
  }
  return Tensor(width, height, depth, fmt, mem.load_words(space));
}

void write_tensor(MemoryImage& mem, const AddressSpace& space,
                  const Tensor& tensor) {
  if (space.length != tensor.byte_size()) {
    throw Error(ErrorCode::kSize,
                "tensor occupies " + std::to_string(tensor.byte_size()) +
                    " bytes, address space holds " +
                    std::to_string(space.length));
  }
  mem.store_words(space, tensor.raws());
}

std::vector<std::byte> serialize_tensor(const Tensor& tensor) {
  std::vector<std::byte> out;
  out.reserve(28 + tensor.byte_size());
  put_magic(out, "QTNS");
  put_u32(out, kFileVersion);
  put_u32(out, static_cast<std::uint32_t>(tensor.format().total_bits));
  put_u32(out, static_cast<std::uint32_t>(tensor.format().frac_bits));
  put_u32(out, tensor.width());
  put_u32(out, tensor.height());
  put_u32(out, tensor.depth());
  for (const std::int32_t raw : tensor.raws()) {
    put_u32(out, static_cast<std::uint32_t>(raw));
  }
  return out;
}

Tensor parse_tensor(std::span<const std::byte> bytes) {
  Reader reader(bytes);
  reader.expect_magic("QTNS");
  read_version(reader);
  const QFormat fmt = read_format(reader);
  const std::uint32_t width = reader.u32("width");
  const std::uint32_t height = reader.u32("height");
  const std::uint32_t depth = reader.u32("depth");
  auto raws =
      reader.raws(element_count({width, height, depth}), "tensor payload");
  reader.expect_end();
  try {
    return Tensor(width, height, depth, fmt, std::move(raws));
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

std::vector<std::byte> serialize_filters(const FilterSet& filters) {
  std::vector<std::byte> out;
  put_magic(out, "QWGT");
  put_u32(out, kFileVersion);
  put_u32(out, static_cast<std::uint32_t>(filters.format.total_bits));
  put_u32(out, static_cast<std::uint32_t>(filters.format.frac_bits));
  put_u32(out, filters.num_filters);
  put_u32(out, filters.depth);
  put_u32(out, filters.kernel);
  for (const std::int32_t raw : filters.weights) {
    put_u32(out, static_cast<std::uint32_t>(raw));
  }
  for (const std::int32_t raw : filters.biases) {
    put_u32(out, static_cast<std::uint32_t>(raw));
  }
  return out;
}

FilterSet parse_filters(std::span<const std::byte> bytes) {
  Reader reader(bytes);
  reader.expect_magic("QWGT");
  read_version(reader);
  FilterSet filters;
  filters.format = read_format(reader);
  filters.num_filters = reader.u32("num_filters");
  filters.depth = reader.u32("depth");
  filters.kernel = reader.u32("kernel");
  filters.weights = reader.raws(
      element_count({filters.num_filters, filters.depth, filters.kernel,
                     filters.kernel}),
      "weights");
  filters.biases = reader.raws(filters.num_filters, "biases");
  reader.expect_end();
  try {
    filters.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
  return filters;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::vector<char> chars((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::vector<std::byte> out(chars.size());
  std::memcpy(out.data(), chars.data(), chars.size());
  return out;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot create " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed for " + path.string());
  }
}

void save_tensor_file(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_bytes(path, serialize_tensor(tensor));
}

Tensor load_tensor_file(const std::filesystem::path& path) {
  return parse_tensor(read_file_bytes(path));
}

void save_filter_file(const std::filesystem::path& path,
                      const FilterSet& filters) {
  write_file_bytes(path, serialize_filters(filters));
}

FilterSet load_filter_file(const std::filesystem::path& path) {
  return parse_filters(read_file_bytes(path));
}

}  // namespace qfabric
