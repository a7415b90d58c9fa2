// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfabric/analysis/error_sweep.hpp"
#include "qfabric/controller.hpp"

namespace qfabric::cli {

// Each command returns the process exit status (0 on success, 1 on error)
// and reports failures on `err`.

int cmd_assemble(const std::filesystem::path& in, const std::filesystem::path& out,
                 std::ostream& err);
int cmd_disassemble(const std::filesystem::path& in,
                    const std::filesystem::path& out, std::ostream& err);

/// Loads the manifest, runs the program, writes the output tensor (and the
/// report file when configured) and prints the RunReport on `out`.
int cmd_run(const std::filesystem::path& manifest, std::ostream& out,
            std::ostream& err);

struct SweepArgs {
  std::vector<std::uint32_t> kernels;
  std::vector<analysis::InputRange> ranges;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  QFormat format = kDefaultFormat;
  std::optional<std::filesystem::path> out;
};
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct ResourcesArgs {
  std::vector<std::uint32_t> kernels;
  std::vector<std::uint32_t> depths;
  std::optional<std::filesystem::path> out;
};
int cmd_resources(const ResourcesArgs& args, std::ostream& out, std::ostream& err);

struct CyclesArgs {
  std::uint32_t gamma = 1;
  std::uint32_t d_in = 1;
  std::uint32_t kernel = 3;
  std::uint32_t width = 0;   // 0 = kernel-sized input
  std::uint32_t height = 0;
  std::uint32_t stride = 1;
  bool zero_pad = false;
  std::optional<std::filesystem::path> out;
};
int cmd_cycles(const CyclesArgs& args, std::ostream& out, std::ostream& err);

/// "3..9" or "3,5,7" (mixable: "1,3..5"). Throws Error(kParse).
std::vector<std::uint32_t> parse_uint_list(const std::string& text);
/// "lo:hi", several separated by commas. Throws Error(kParse).
std::vector<analysis::InputRange> parse_ranges(const std::string& text);

/// Full command line: subcommand dispatch and flag parsing.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace qfabric::cli
