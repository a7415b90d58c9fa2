// SPDX-License-Identifier: Apache-2.0
#include "qfabric/error.hpp"

namespace qfabric {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kFormatMismatch: return "format mismatch";
    case ErrorCode::kAddress: return "address error";
    case ErrorCode::kSize: return "size error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kTruncated: return "truncated payload";
    case ErrorCode::kMalformedFile: return "malformed file";
    case ErrorCode::kEncoding: return "encoding error";
    case ErrorCode::kIllegalInstruction: return "illegal instruction";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kSemantic: return "semantic error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kRunawayProgram: return "runaway program";
    case ErrorCode::kLayout: return "layout error";
    case ErrorCode::kRange: return "range error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

AsmError::AsmError(ErrorCode code, std::size_t line, std::size_t column,
                   const std::string& message)
    : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " +
                      message),
      line_(line),
      column_(column),
      detail_(message) {}

}  // namespace qfabric
