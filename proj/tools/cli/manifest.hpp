// SPDX-License-Identifier: Apache-2.0
//
// Run manifest: an INI file describing the fabric and where each file is
// placed in simulated memory. Relative paths resolve against the manifest's
// directory.
//
//   [fabric]   d_in, kernel, num_filters, pool, activation,
//              total_bits (32), frac_bits (15)
//   [memory]   size
//   [program]  path            (.bin = word stream, anything else = assembly)
//   [input]    path, base
//   [filterN]  path, weights_base, biases_base   (any section named filter*)
//   [output]   path, base, width, height, depth, report (optional)
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "qfabric/fabric.hpp"
#include "qfabric/memory.hpp"

namespace qfabric::cli {

struct FilterPlacement {
  std::filesystem::path path;
  std::uint64_t weights_base = 0;
  std::uint64_t biases_base = 0;
};

struct RunManifest {
  FabricConfig fabric;
  std::uint64_t memory_size = 0;
  std::filesystem::path program;
  std::filesystem::path input;
  std::uint64_t input_base = 0;
  std::vector<FilterPlacement> filters;
  std::filesystem::path output;
  std::uint64_t output_base = 0;
  std::uint32_t output_width = 0;
  std::uint32_t output_height = 0;
  std::uint32_t output_depth = 0;
  std::optional<std::filesystem::path> report;

  /// Throws Error(kConfiguration) for an invalid fabric or empty memory.
  void validate() const;
};

/// Throws Error(kParse) on syntax errors or missing/ill-typed keys.
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace qfabric::cli
