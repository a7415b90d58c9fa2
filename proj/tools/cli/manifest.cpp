// SPDX-License-Identifier: Apache-2.0
#include "cli/manifest.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <string>

#include "qfabric/error.hpp"

namespace qfabric::cli {

namespace pt = boost::property_tree;

namespace {

std::uint64_t parse_uint(const std::string& text, const std::string& key) {
  std::string_view digits = text;
  int base = 10;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    digits.remove_prefix(2);
    base = 16;
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::kParse,
                "manifest key " + key + ": '" + text + "' is not an unsigned integer");
  }
  return value;
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : name_(std::move(name)) {
    const auto child = tree.get_child_optional(pt::ptree::path_type(name_, '\0'));
    if (!child) {
      throw Error(ErrorCode::kParse, "manifest lacks section [" + name_ + "]");
    }
    node_ = &*child;
  }
  Section(const pt::ptree& node, std::string name, int)
      : name_(std::move(name)), node_(&node) {}

  std::string str(const std::string& key) const {
    const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) throw Error(ErrorCode::kParse, "manifest lacks " + name_ + "." + key);
    return *v;
  }
  std::optional<std::string> optional_str(const std::string& key) const {
    const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }
  std::uint64_t u64(const std::string& key) const {
    return parse_uint(str(key), name_ + "." + key);
  }
  std::uint64_t u64_or(const std::string& key, std::uint64_t fallback) const {
    const auto v = optional_str(key);
    return v ? parse_uint(*v, name_ + "." + key) : fallback;
  }
  std::uint32_t u32(const std::string& key) const {
    const std::uint64_t v = u64(key);
    if (v > UINT32_MAX) {
      throw Error(ErrorCode::kParse, "manifest key " + name_ + "." + key + " too large");
    }
    return static_cast<std::uint32_t>(v);
  }

 private:
  std::string name_;
  const pt::ptree* node_ = nullptr;
};

}  // namespace

void RunManifest::validate() const {
  fabric.validate();
  if (memory_size == 0) {
    throw Error(ErrorCode::kConfiguration, "memory size must be > 0");
  }
  if (filters.empty()) {
    throw Error(ErrorCode::kConfiguration, "manifest names no filter files");
  }
}

RunManifest load_manifest(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  const auto dir = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : dir / fp;
  };

  RunManifest m;
  const Section fabric(tree, "fabric");
  m.fabric.d_in = fabric.u32("d_in");
  m.fabric.kernel = fabric.u32("kernel");
  m.fabric.num_filters = fabric.u32("num_filters");
  m.fabric.pool = fabric.u32("pool");
  try {
    m.fabric.activation = parse_activation(fabric.str("activation"));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("manifest fabric.activation: ") + e.what());
  }
  m.fabric.format.total_bits = static_cast<int>(fabric.u64_or("total_bits", 32));
  m.fabric.format.frac_bits = static_cast<int>(fabric.u64_or("frac_bits", 15));

  m.memory_size = Section(tree, "memory").u64("size");
  m.program = resolve(Section(tree, "program").str("path"));

  const Section input(tree, "input");
  m.input = resolve(input.str("path"));
  m.input_base = input.u64("base");

  for (const auto& [name, node] : tree) {
    if (name.rfind("filter", 0) != 0) continue;
    const Section s(node, name, 0);
    m.filters.push_back(FilterPlacement{resolve(s.str("path")),
                                        s.u64("weights_base"), s.u64("biases_base")});
  }

  const Section output(tree, "output");
  m.output = resolve(output.str("path"));
  m.output_base = output.u64("base");
  m.output_width = output.u32("width");
  m.output_height = output.u32("height");
  m.output_depth = output.u32("depth");
  if (const auto report = output.optional_str("report")) m.report = resolve(*report);
  return m;
}

}  // namespace qfabric::cli
