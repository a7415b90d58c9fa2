// SPDX-License-Identifier: Apache-2.0
//
// Instruction set of the co-processor. Every instruction is one 64-bit word;
// bit 63 selects the class.
//
//   MatrixWeb control (TYPE=0)
//     [62:60] CONFIG  0 Nop, 1 Convolve, 2 Flush, 3 Stop
//     [59:46] IFD_W   input feature width   (14 bits)
//     [45:32] IFD_H   input feature height  (14 bits)
//     [31:20] IFD_D   input feature depth   (12 bits)
//     [19:12] SL      stride                (8 bits)
//     [11]    ZP      zero padding enable
//     [10:0]  reserved, must be zero
//
//   Memory control (TYPE=1)
//     [62:61] KIND    0 InputFeatures, 1 Weights, 2 Biases, 3 Outputs
//     [60:53] CBU     target cell body (must be 0 for InputFeatures)
//     [52:21] BASE    byte address      (32 bits)
//     [20:0]  LEN     length in words   (21 bits)
//
// Assembly, one instruction per line, ';' starts a comment:
//   NOP | FLUSH | HALT                      optional key=value operands
//   CONV w=<int> h=<int> d=<int> sl=<int> zp=<0|1>
//   LDI <base>, <bytes>
//   LDW|LDB|STO <cbu>, <base>, <bytes>
// Integers are decimal or 0x-hex. Lengths are in bytes (multiples of 4).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qfabric/memory.hpp"

namespace qfabric {

enum class ConfigOp : std::uint8_t { kNop = 0, kConvolve = 1, kFlush = 2, kStop = 3 };

enum class MemKind : std::uint8_t {
  kInputFeatures = 0,
  kWeights = 1,
  kBiases = 2,
  kOutputs = 3,
};

struct MWControl {
  ConfigOp config = ConfigOp::kNop;
  std::uint32_t ifd_width = 0;
  std::uint32_t ifd_height = 0;
  std::uint32_t ifd_depth = 0;
  std::uint32_t stride = 0;
  bool zero_pad = false;

  bool operator==(const MWControl&) const = default;
};

struct MemControl {
  MemKind kind = MemKind::kInputFeatures;
  std::uint32_t cbu = 0;
  AddressSpace space;

  bool operator==(const MemControl&) const = default;
};

using Instruction = std::variant<MWControl, MemControl>;
using Word = std::uint64_t;
using Program = std::vector<Instruction>;

namespace field_limits {
inline constexpr std::uint32_t kIfdWidth = (1u << 14) - 1;
inline constexpr std::uint32_t kIfdHeight = (1u << 14) - 1;
inline constexpr std::uint32_t kIfdDepth = (1u << 12) - 1;
inline constexpr std::uint32_t kStride = (1u << 8) - 1;
inline constexpr std::uint32_t kCbu = (1u << 8) - 1;
inline constexpr std::uint64_t kBase = (std::uint64_t{1} << 32) - 1;
inline constexpr std::uint64_t kLengthWords = (std::uint64_t{1} << 21) - 1;
}  // namespace field_limits

// Builders for the common forms.
Instruction nop();
Instruction halt();
Instruction flush();
Instruction convolve(std::uint32_t width, std::uint32_t height,
                     std::uint32_t depth, std::uint32_t stride, bool zero_pad);
Instruction load_input(const AddressSpace& space);
Instruction load_weights(std::uint32_t cbu, const AddressSpace& space);
Instruction load_biases(std::uint32_t cbu, const AddressSpace& space);
Instruction store_outputs(std::uint32_t cbu, const AddressSpace& space);

/// Throws Error(kEncoding) naming the first field that does not fit.
Word encode_instruction(const Instruction& ins);
/// Throws Error(kIllegalInstruction) on reserved CONFIG codes, non-zero
/// reserved bits, or a CBU index on an InputFeatures instruction.
Instruction decode_instruction(Word word);

std::vector<Word> encode_program(std::span<const Instruction> program);
Program decode_program(std::span<const Word> words);

/// Little-endian 64-bit word stream.
std::vector<std::byte> words_to_bytes(std::span<const Word> words);
/// Throws Error(kTruncated) if the length is not a multiple of 8.
std::vector<Word> words_from_bytes(std::span<const std::byte> bytes);

/// Throws AsmError with line/column on syntax (kParse) or semantic
/// (kSemantic) failures. A (kind, cbu) memory register may be set at most
/// once between Convolve instructions.
Program assemble(std::string_view text);
/// Canonical text, one instruction per line, newline-terminated.
std::string disassemble(std::span<const Instruction> program);
std::string to_string(const Instruction& ins);

std::string_view mnemonic(ConfigOp op);
std::string_view mnemonic(MemKind kind);

}  // namespace qfabric
