// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qfabric {

enum class ErrorCode {
  kInvalidInput,
  kFormatMismatch,
  kAddress,
  kSize,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kMalformedFile,
  kEncoding,
  kIllegalInstruction,
  kParse,
  kSemantic,
  kShape,
  kConfiguration,
  kRunawayProgram,
  kLayout,
  kRange,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and is what callers (and tests) should branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Assembler diagnostic carrying a 1-based source position.
class AsmError : public Error {
 public:
  AsmError(ErrorCode code, std::size_t line, std::size_t column,
           const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

}  // namespace qfabric
