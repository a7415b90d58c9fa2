// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <utility>

#include "qfabric/error.hpp"
#include "qfabric/isa.hpp"

namespace qfabric {

namespace {

enum class TokenKind { kWord, kComma, kEquals };

struct Token {
  TokenKind kind;
  std::string_view text;
  std::size_t column;  // 1-based
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no)
      : line_(line), line_no_(line_no) {
    tokenize();
  }

  bool empty() const { return tokens_.empty(); }

  [[noreturn]] void fail(ErrorCode code, std::size_t column,
                         const std::string& message) const {
    throw AsmError(code, line_no_, column, message);
  }

  std::size_t end_column() const { return line_.size() + 1; }

  const Token* peek() const {
    return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr;
  }

  const Token& expect(TokenKind kind, const char* what) {
    const Token* tok = peek();
    if (tok == nullptr) {
      fail(ErrorCode::kParse, end_column(),
           std::string("expected ") + what + " before end of line");
    }
    if (tok->kind != kind) {
      fail(ErrorCode::kParse, tok->column,
           std::string("expected ") + what + ", found '" +
               std::string(tok->text) + "'");
    }
    ++pos_;
    return *tok;
  }

  std::pair<std::uint64_t, std::size_t> integer(const char* what) {
    const Token& tok = expect(TokenKind::kWord, what);
    std::string_view digits = tok.text;
    int base = 10;
    if (digits.size() > 2 && digits[0] == '0' &&
        (digits[1] == 'x' || digits[1] == 'X')) {
      digits.remove_prefix(2);
      base = 16;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
    if (ec != std::errc() || ptr != digits.data() + digits.size() ||
        digits.empty()) {
      fail(ErrorCode::kParse, tok.column,
           std::string("bad operand: expected ") + what + ", found '" +
               std::string(tok.text) + "'");
    }
    return {value, tok.column};
  }

  void expect_end() const {
    if (const Token* tok = peek()) {
      fail(ErrorCode::kParse, tok->column,
           "unexpected operand '" + std::string(tok->text) + "'");
    }
  }

 private:
  void tokenize() {
    std::size_t i = 0;
    while (i < line_.size()) {
      const char c = line_[i];
      if (c == ';') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == ',') {
        tokens_.push_back({TokenKind::kComma, line_.substr(i, 1), i + 1});
        ++i;
      } else if (c == '=') {
        tokens_.push_back({TokenKind::kEquals, line_.substr(i, 1), i + 1});
        ++i;
      } else {
        const std::size_t start = i;
        while (i < line_.size() && line_[i] != ',' && line_[i] != '=' &&
               line_[i] != ';' &&
               !std::isspace(static_cast<unsigned char>(line_[i]))) {
          ++i;
        }
        tokens_.push_back(
            {TokenKind::kWord, line_.substr(start, i - start), start + 1});
      }
    }
  }

  std::string_view line_;
  std::size_t line_no_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::optional<ConfigOp> config_mnemonic(std::string_view m) {
  if (m == "NOP") return ConfigOp::kNop;
  if (m == "CONV") return ConfigOp::kConvolve;
  if (m == "FLUSH") return ConfigOp::kFlush;
  if (m == "HALT") return ConfigOp::kStop;
  return std::nullopt;
}

std::optional<MemKind> memory_mnemonic(std::string_view m) {
  if (m == "LDI") return MemKind::kInputFeatures;
  if (m == "LDW") return MemKind::kWeights;
  if (m == "LDB") return MemKind::kBiases;
  if (m == "STO") return MemKind::kOutputs;
  return std::nullopt;
}

MWControl parse_config(LineParser& p, ConfigOp op, std::size_t mnemonic_col) {
  struct Key {
    const char* name;
    std::uint64_t limit;
    std::optional<std::uint64_t> value;
  };
  std::array<Key, 5> keys{{{"W", field_limits::kIfdWidth, {}},
                           {"H", field_limits::kIfdHeight, {}},
                           {"D", field_limits::kIfdDepth, {}},
                           {"SL", field_limits::kStride, {}},
                           {"ZP", 1, {}}}};
  while (p.peek() != nullptr) {
    const Token& name = p.expect(TokenKind::kWord, "operand name");
    const std::string key = upper(name.text);
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const Key& k) { return key == k.name; });
    if (it == keys.end()) {
      p.fail(ErrorCode::kParse, name.column,
             "unknown operand '" + std::string(name.text) + "'");
    }
    if (it->value) {
      p.fail(ErrorCode::kParse, name.column,
             "duplicate operand '" + std::string(name.text) + "'");
    }
    p.expect(TokenKind::kEquals, "'='");
    const auto [value, col] = p.integer("integer value");
    if (value > it->limit) {
      p.fail(ErrorCode::kParse, col,
             "bad operand: " + std::string(name.text) + "=" +
                 std::to_string(value) + " exceeds " +
                 std::to_string(it->limit));
    }
    it->value = value;
  }
  if (op == ConfigOp::kConvolve) {
    for (const Key& k : keys) {
      if (!k.value) {
        p.fail(ErrorCode::kParse, p.end_column(),
               std::string("CONV requires operand ") + k.name);
      }
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (*keys[i].value == 0) {
        p.fail(ErrorCode::kSemantic, mnemonic_col,
               std::string("CONV operand ") + keys[i].name + " must be >= 1");
      }
    }
  }
  MWControl mw;
  mw.config = op;
  mw.ifd_width = static_cast<std::uint32_t>(keys[0].value.value_or(0));
  mw.ifd_height = static_cast<std::uint32_t>(keys[1].value.value_or(0));
  mw.ifd_depth = static_cast<std::uint32_t>(keys[2].value.value_or(0));
  mw.stride = static_cast<std::uint32_t>(keys[3].value.value_or(0));
  mw.zero_pad = keys[4].value.value_or(0) != 0;
  return mw;
}

MemControl parse_memory(LineParser& p, MemKind kind) {
  MemControl mc;
  mc.kind = kind;
  if (kind != MemKind::kInputFeatures) {
    const auto [cbu, col] = p.integer("cbu index");
    if (cbu > field_limits::kCbu) {
      p.fail(ErrorCode::kParse, col,
             "bad operand: cbu " + std::to_string(cbu) + " exceeds " +
                 std::to_string(field_limits::kCbu));
    }
    mc.cbu = static_cast<std::uint32_t>(cbu);
    p.expect(TokenKind::kComma, "','");
  }
  const auto [base, base_col] = p.integer("base address");
  if (base > field_limits::kBase) {
    p.fail(ErrorCode::kParse, base_col, "bad operand: base exceeds 32 bits");
  }
  p.expect(TokenKind::kComma, "','");
  const auto [length, len_col] = p.integer("length in bytes");
  if (length % kWordBytes != 0) {
    p.fail(ErrorCode::kParse, len_col,
           "bad operand: length " + std::to_string(length) +
               " is not a multiple of 4");
  }
  if (length / kWordBytes > field_limits::kLengthWords) {
    p.fail(ErrorCode::kParse, len_col, "bad operand: length exceeds LEN field");
  }
  mc.space = AddressSpace{base, length};
  return mc;
}

}  // namespace

Program assemble(std::string_view text) {
  Program program;
  // (kind, cbu) registers written since the last CONV.
  std::set<std::pair<MemKind, std::uint32_t>> pending;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line_no;
    const std::size_t nl = text.find('\n', start);
    const std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(start, stop - start);
    start = stop + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    LineParser p(line, line_no);
    if (p.empty()) continue;
    const Token& head = p.expect(TokenKind::kWord, "mnemonic");
    const std::string m = upper(head.text);
    if (const auto op = config_mnemonic(m)) {
      program.push_back(parse_config(p, *op, head.column));
      if (*op == ConfigOp::kConvolve) pending.clear();
    } else if (const auto kind = memory_mnemonic(m)) {
      MemControl mc = parse_memory(p, *kind);
      p.expect_end();
      if (!pending.emplace(mc.kind, mc.cbu).second) {
        p.fail(ErrorCode::kSemantic, head.column,
               "duplicate " + std::string(mnemonic(mc.kind)) +
                   (mc.kind == MemKind::kInputFeatures
                        ? std::string()
                        : " for cbu " + std::to_string(mc.cbu)) +
                   " before CONV");
      }
      program.push_back(mc);
    } else {
      p.fail(ErrorCode::kParse, head.column,
             "unknown mnemonic '" + std::string(head.text) + "'");
    }
  }
  return program;
}

}  // namespace qfabric
