// SPDX-License-Identifier: Apache-2.0
#include "qfabric/isa.hpp"

#include <sstream>

#include "qfabric/error.hpp"

namespace qfabric {

namespace {

constexpr Word kTypeBit = Word{1} << 63;

void require_fits(std::uint64_t value, std::uint64_t limit, const char* field) {
  if (value > limit) {
    throw Error(ErrorCode::kEncoding, std::string("field ") + field + " value " +
                                          std::to_string(value) +
                                          " exceeds maximum " +
                                          std::to_string(limit));
  }
}

Word field(Word word, int lo, int width) {
  return (word >> lo) & ((Word{1} << width) - 1);
}

Word encode_mw(const MWControl& mw) {
  using namespace field_limits;
  require_fits(mw.ifd_width, kIfdWidth, "IFD_W");
  require_fits(mw.ifd_height, kIfdHeight, "IFD_H");
  require_fits(mw.ifd_depth, kIfdDepth, "IFD_D");
  require_fits(mw.stride, kStride, "SL");
  if (static_cast<unsigned>(mw.config) > 3) {
    throw Error(ErrorCode::kEncoding, "field CONFIG holds a reserved code");
  }
  return (Word{static_cast<unsigned>(mw.config)} << 60) |
         (Word{mw.ifd_width} << 46) | (Word{mw.ifd_height} << 32) |
         (Word{mw.ifd_depth} << 20) | (Word{mw.stride} << 12) |
         (Word{mw.zero_pad ? 1u : 0u} << 11);
}

Word encode_mem(const MemControl& mc) {
  using namespace field_limits;
  if (mc.kind == MemKind::kInputFeatures && mc.cbu != 0) {
    throw Error(ErrorCode::kEncoding,
                "field CBU must be 0 for an InputFeatures instruction");
  }
  require_fits(mc.cbu, kCbu, "CBU");
  require_fits(mc.space.base, kBase, "BASE");
  if (mc.space.length % kWordBytes != 0) {
    throw Error(ErrorCode::kEncoding,
                "field LEN: byte length " + std::to_string(mc.space.length) +
                    " is not a whole number of words");
  }
  require_fits(mc.space.words(), kLengthWords, "LEN");
  return kTypeBit | (Word{static_cast<unsigned>(mc.kind)} << 61) |
         (Word{mc.cbu} << 53) | (Word{mc.space.base} << 21) |
         Word{mc.space.words()};
}

}  // namespace

Instruction nop() { return MWControl{}; }
Instruction halt() { return MWControl{.config = ConfigOp::kStop}; }
Instruction flush() { return MWControl{.config = ConfigOp::kFlush}; }

Instruction convolve(std::uint32_t width, std::uint32_t height,
                     std::uint32_t depth, std::uint32_t stride, bool zero_pad) {
  return MWControl{ConfigOp::kConvolve, width, height, depth, stride, zero_pad};
}

Instruction load_input(const AddressSpace& space) {
  return MemControl{MemKind::kInputFeatures, 0, space};
}
Instruction load_weights(std::uint32_t cbu, const AddressSpace& space) {
  return MemControl{MemKind::kWeights, cbu, space};
}
Instruction load_biases(std::uint32_t cbu, const AddressSpace& space) {
  return MemControl{MemKind::kBiases, cbu, space};
}
Instruction store_outputs(std::uint32_t cbu, const AddressSpace& space) {
  return MemControl{MemKind::kOutputs, cbu, space};
}

Word encode_instruction(const Instruction& ins) {
  if (const auto* mw = std::get_if<MWControl>(&ins)) return encode_mw(*mw);
  return encode_mem(std::get<MemControl>(ins));
}

Instruction decode_instruction(Word word) {
  if ((word & kTypeBit) == 0) {
    const auto config = static_cast<unsigned>(field(word, 60, 3));
    if (config > 3) {
      throw Error(ErrorCode::kIllegalInstruction,
                  "reserved CONFIG code " + std::to_string(config));
    }
    if (field(word, 0, 11) != 0) {
      throw Error(ErrorCode::kIllegalInstruction,
                  "reserved bits [10:0] of a MatrixWeb instruction are set");
    }
    MWControl mw;
    mw.config = static_cast<ConfigOp>(config);
    mw.ifd_width = static_cast<std::uint32_t>(field(word, 46, 14));
    mw.ifd_height = static_cast<std::uint32_t>(field(word, 32, 14));
    mw.ifd_depth = static_cast<std::uint32_t>(field(word, 20, 12));
    mw.stride = static_cast<std::uint32_t>(field(word, 12, 8));
    mw.zero_pad = field(word, 11, 1) != 0;
    return mw;
  }
  MemControl mc;
  mc.kind = static_cast<MemKind>(field(word, 61, 2));
  mc.cbu = static_cast<std::uint32_t>(field(word, 53, 8));
  if (mc.kind == MemKind::kInputFeatures && mc.cbu != 0) {
    throw Error(ErrorCode::kIllegalInstruction,
                "InputFeatures instruction carries a CBU index");
  }
  mc.space.base = field(word, 21, 32);
  mc.space.length = field(word, 0, 21) * kWordBytes;
  return mc;
}

std::vector<Word> encode_program(std::span<const Instruction> program) {
  std::vector<Word> words;
  words.reserve(program.size());
  for (const auto& ins : program) words.push_back(encode_instruction(ins));
  return words;
}

Program decode_program(std::span<const Word> words) {
  Program program;
  program.reserve(words.size());
  for (const Word w : words) program.push_back(decode_instruction(w));
  return program;
}

std::vector<std::byte> words_to_bytes(std::span<const Word> words) {
  std::vector<std::byte> out;
  out.reserve(words.size() * 8);
  for (const Word w : words) {
    for (int b = 0; b < 8; ++b) {
      out.push_back(static_cast<std::byte>((w >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

std::vector<Word> words_from_bytes(std::span<const std::byte> bytes) {
  if (bytes.size() % 8 != 0) {
    throw Error(ErrorCode::kTruncated,
                "instruction stream of " + std::to_string(bytes.size()) +
                    " bytes is not a whole number of 64-bit words");
  }
  std::vector<Word> words(bytes.size() / 8);
  for (std::size_t i = 0; i < words.size(); ++i) {
    Word w = 0;
    for (int b = 0; b < 8; ++b) {
      w |= std::to_integer<Word>(bytes[i * 8 + b]) << (8 * b);
    }
    words[i] = w;
  }
  return words;
}

std::string_view mnemonic(ConfigOp op) {
  switch (op) {
    case ConfigOp::kNop: return "NOP";
    case ConfigOp::kConvolve: return "CONV";
    case ConfigOp::kFlush: return "FLUSH";
    case ConfigOp::kStop: return "HALT";
  }
  return "?";
}

std::string_view mnemonic(MemKind kind) {
  switch (kind) {
    case MemKind::kInputFeatures: return "LDI";
    case MemKind::kWeights: return "LDW";
    case MemKind::kBiases: return "LDB";
    case MemKind::kOutputs: return "STO";
  }
  return "?";
}

std::string to_string(const Instruction& ins) {
  std::ostringstream os;
  if (const auto* mw = std::get_if<MWControl>(&ins)) {
    os << mnemonic(mw->config);
    // CONV always spells out its operands; the other forms only when set.
    const bool all = mw->config == ConfigOp::kConvolve;
    const auto operand = [&](const char* key, std::uint32_t value) {
      if (all || value != 0) os << ' ' << key << '=' << value;
    };
    operand("w", mw->ifd_width);
    operand("h", mw->ifd_height);
    operand("d", mw->ifd_depth);
    operand("sl", mw->stride);
    operand("zp", mw->zero_pad ? 1 : 0);
    return os.str();
  }
  const auto& mc = std::get<MemControl>(ins);
  os << mnemonic(mc.kind) << ' ';
  if (mc.kind != MemKind::kInputFeatures) os << mc.cbu << ", ";
  os << "0x" << std::hex << std::uppercase << mc.space.base << std::dec
     << ", " << mc.space.length;
  return os.str();
}

std::string disassemble(std::span<const Instruction> program) {
  std::string text;
  for (const auto& ins : program) {
    text += to_string(ins);
    text += '\n';
  }
  return text;
}

}  // namespace qfabric
