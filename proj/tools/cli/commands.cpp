// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli/manifest.hpp"
#include "qfabric/analysis/cost_model.hpp"
#include "qfabric/error.hpp"
#include "qfabric/isa.hpp"

namespace qfabric::cli {

namespace {

constexpr std::uint64_t kMinReportedTrials = 100;

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

void report(std::ostream& err, const std::string& where, const std::exception& e) {
  err << "qfabric: " << where << "error: " << e.what() << '\n';
}

// Runs `body`, converting exceptions into a diagnostic and exit status 1.
template <typename Body>
int guarded(std::ostream& err, const std::filesystem::path& source, Body&& body) {
  try {
    body();
    return 0;
  } catch (const AsmError& e) {
    err << source.string() << ':' << e.line() << ':' << e.column()
        << ": error: " << e.detail() << '\n';
  } catch (const Error& e) {
    report(err, std::string(to_string(e.code())) + ": ", e);
  } catch (const std::exception& e) {
    report(err, "", e);
  }
  return 1;
}

// Writes CSV to the file when given, else to `out`.
template <typename Writer>
void emit(const std::optional<std::filesystem::path>& path, std::ostream& out,
          Writer&& writer) {
  if (!path) {
    writer(out);
    return;
  }
  std::ostringstream os;
  writer(os);
  write_text(*path, os.str());
}

std::uint32_t parse_u32(std::string_view s, const std::string& whole) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "bad integer list '" + whole + "'");
  }
  return v;
}

double parse_double(std::string_view s, const std::string& whole) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad range '" + whole + "'");
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<std::uint32_t> parse_uint_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  for (const auto part : split(text, ',')) {
    const std::size_t dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_u32(part, text));
      continue;
    }
    const std::uint32_t lo = parse_u32(part.substr(0, dots), text);
    const std::uint32_t hi = parse_u32(part.substr(dots + 2), text);
    if (lo > hi) throw Error(ErrorCode::kParse, "empty span in '" + text + "'");
    for (std::uint32_t v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::vector<analysis::InputRange> parse_ranges(const std::string& text) {
  std::vector<analysis::InputRange> out;
  for (const auto part : split(text, ',')) {
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "range '" + std::string(part) + "' is not lo:hi");
    }
    out.push_back({parse_double(part.substr(0, colon), text),
                   parse_double(part.substr(colon + 1), text)});
  }
  return out;
}

int cmd_assemble(const std::filesystem::path& in, const std::filesystem::path& out,
                 std::ostream& err) {
  return guarded(err, in, [&] {
    const Program program = assemble(read_text(in));
    write_file_bytes(out, words_to_bytes(encode_program(program)));
  });
}

int cmd_disassemble(const std::filesystem::path& in,
                    const std::filesystem::path& out, std::ostream& err) {
  return guarded(err, in, [&] {
    const auto words = words_from_bytes(read_file_bytes(in));
    write_text(out, disassemble(decode_program(words)));
  });
}

int cmd_run(const std::filesystem::path& manifest_path, std::ostream& out,
            std::ostream& err) {
  std::filesystem::path source = manifest_path;
  return guarded(err, source, [&] {
    const RunManifest m = load_manifest(manifest_path);
    m.validate();

    Program program;
    source = m.program;
    if (m.program.extension() == ".bin") {
      program = decode_program(words_from_bytes(read_file_bytes(m.program)));
    } else {
      program = assemble(read_text(m.program));
    }
    source = manifest_path;

    MemoryImage mem(m.memory_size);
    const Tensor input = load_tensor_file(m.input);
    if (input.format() != m.fabric.format) {
      throw Error(ErrorCode::kFormatMismatch,
                  "input tensor is " + to_string(input.format()) + ", fabric is " +
                      to_string(m.fabric.format));
    }
    write_tensor(mem, {m.input_base, input.byte_size()}, input);
    for (const auto& placement : m.filters) {
      const FilterSet filters = load_filter_file(placement.path);
      if (filters.format != m.fabric.format || filters.kernel != m.fabric.kernel) {
        throw Error(ErrorCode::kConfiguration,
                    placement.path.string() + " does not match the fabric format/kernel");
      }
      mem.store_words({placement.weights_base, filters.weights.size() * kWordBytes},
                      filters.weights);
      mem.store_words({placement.biases_base, filters.biases.size() * kWordBytes},
                      filters.biases);
    }

    const RunReport rr = run_program(program, mem, m.fabric);
    const TensorDims dims{m.output_width, m.output_height, m.output_depth};
    save_tensor_file(m.output, read_tensor(mem, {m.output_base, dims.bytes()},
                                           dims.width, dims.height, dims.depth,
                                           m.fabric.format));
    const std::string text = rr.to_text();
    out << text;
    if (m.report) write_text(*m.report, text);
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, {}, [&] {
    if (args.trials < kMinReportedTrials) {
      throw Error(ErrorCode::kInvalidInput,
                  "sweep needs --trials >= " + std::to_string(kMinReportedTrials));
    }
    if (args.kernels.empty() || args.ranges.empty()) {
      throw Error(ErrorCode::kInvalidInput, "sweep needs --kernels and --range");
    }
    const auto rows = analysis::error_sweep(args.kernels, args.ranges, args.trials,
                                            args.seed, args.format);
    emit(args.out, out, [&](std::ostream& os) { analysis::write_sweep_csv(os, rows); });
  });
}

int cmd_resources(const ResourcesArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, {}, [&] {
    std::vector<analysis::ResourceRow> rows;
    for (const auto d : args.depths) {
      for (const auto k : args.kernels) rows.push_back({k, d});
    }
    // Validate before writing anything.
    for (const auto& row : rows) analysis::adders_per_cbu(row.kernel, row.d_in);
    emit(args.out, out,
         [&](std::ostream& os) { analysis::write_resources_csv(os, rows); });
  });
}

int cmd_cycles(const CyclesArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, {}, [&] {
    FabricConfig cfg;
    cfg.d_in = args.d_in;
    cfg.kernel = args.kernel;
    cfg.num_filters = args.gamma;
    const std::uint32_t w = args.width ? args.width : args.kernel;
    const std::uint32_t h = args.height ? args.height : args.kernel;
    const analysis::CycleRow row{args.gamma, args.d_in, args.kernel,
                                 analysis::cycle_model(cfg, w, h, args.stride,
                                                       args.zero_pad)};
    emit(args.out, out, [&](std::ostream& os) {
      analysis::write_cycles_csv(os, std::span(&row, 1));
    });
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"qfabric: fixed-point CNN co-processor simulator and toolchain"};
  app.require_subcommand(1);

  std::string in_path, out_path;
  auto* assemble_cmd = app.add_subcommand("assemble", "Assemble text into a word stream");
  assemble_cmd->add_option("input", in_path, "Assembly source")->required();
  assemble_cmd->add_option("output", out_path, "Binary output")->required();

  auto* disassemble_cmd =
      app.add_subcommand("disassemble", "Disassemble a word stream into text");
  disassemble_cmd->add_option("input", in_path, "Binary program")->required();
  disassemble_cmd->add_option("output", out_path, "Assembly output")->required();

  std::string manifest;
  auto* run_cmd = app.add_subcommand("run", "Execute a run manifest");
  run_cmd->add_option("manifest", manifest, "Run manifest (.ini)")->required();

  std::string kernels = "3..9", ranges = "0:50", csv_out;
  std::uint64_t trials = 1000;
  std::optional<std::uint64_t> seed;
  int total_bits = 32, frac_bits = 15;
  auto* sweep_cmd = app.add_subcommand("sweep", "Fixed-vs-float error sweep");
  sweep_cmd->add_option("--kernels", kernels, "Kernel widths, e.g. 3..9 or 3,5,7");
  sweep_cmd->add_option("--range", ranges, "Input ranges lo:hi[,lo:hi...]");
  sweep_cmd->add_option("--trials", trials, "Output points per row (>= 100)");
  sweep_cmd->add_option("--seed", seed, "Seed (default: $QFABRIC_SEED or 1)");
  sweep_cmd->add_option("--total-bits", total_bits, "Q-format total bits");
  sweep_cmd->add_option("--frac-bits", frac_bits, "Q-format fractional bits");
  sweep_cmd->add_option("--out", csv_out, "CSV output file (default stdout)");

  std::string res_k = "3", res_din = "1";
  auto* resources_cmd = app.add_subcommand("resources", "Per-CBU resource counts");
  resources_cmd->add_option("--k", res_k, "Kernel widths, e.g. 3 or 3..9");
  resources_cmd->add_option("--din", res_din, "Input depths, e.g. 1,3");
  resources_cmd->add_option("--out", csv_out, "CSV output file (default stdout)");

  CyclesArgs cycles;
  int zp = 0;
  auto* cycles_cmd = app.add_subcommand("cycles", "Instruction fetch and cycle model");
  cycles_cmd->add_option("--gamma", cycles.gamma, "Number of CBUs")->required();
  cycles_cmd->add_option("--din", cycles.d_in, "Input depth")->required();
  cycles_cmd->add_option("--k", cycles.kernel, "Kernel width")->required();
  cycles_cmd->add_option("--width", cycles.width, "Input width (default k)");
  cycles_cmd->add_option("--height", cycles.height, "Input height (default k)");
  cycles_cmd->add_option("--stride", cycles.stride, "Stride");
  cycles_cmd->add_option("--zp", zp, "Zero padding 0|1")->check(CLI::Range(0, 1));
  cycles_cmd->add_option("--out", csv_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream os_out, os_err;
    const int status = app.exit(e, os_out, os_err);
    out << os_out.str();
    err << os_err.str();
    return status;
  }

  const auto csv_path = [&]() -> std::optional<std::filesystem::path> {
    if (csv_out.empty()) return std::nullopt;
    return std::filesystem::path(csv_out);
  };

  if (*assemble_cmd) return cmd_assemble(in_path, out_path, err);
  if (*disassemble_cmd) return cmd_disassemble(in_path, out_path, err);
  if (*run_cmd) return cmd_run(manifest, out, err);

  if (*sweep_cmd) {
    SweepArgs args;
    int status = guarded(err, {}, [&] {
      args.kernels = parse_uint_list(kernels);
      args.ranges = parse_ranges(ranges);
      if (seed) {
        args.seed = *seed;
      } else if (const char* env = std::getenv("QFABRIC_SEED")) {
        args.seed = std::stoull(env);
      }
    });
    if (status != 0) return status;
    args.trials = trials;
    args.format = QFormat{total_bits, frac_bits};
    args.out = csv_path();
    return cmd_sweep(args, out, err);
  }
  if (*resources_cmd) {
    ResourcesArgs args;
    const int status = guarded(err, {}, [&] {
      args.kernels = parse_uint_list(res_k);
      args.depths = parse_uint_list(res_din);
    });
    if (status != 0) return status;
    args.out = csv_path();
    return cmd_resources(args, out, err);
  }
  cycles.zero_pad = zp != 0;
  cycles.out = csv_path();
  return cmd_cycles(cycles, out, err);
}

}  // namespace qfabric::cli
