#include "lfqa/error.hpp"

namespace lfqa {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Format: return "format error";
    case ErrorCode::DuplicateId: return "duplicate id";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::DimMismatch: return "dimension mismatch";
    case ErrorCode::Budget: return "token budget exceeded";
    case ErrorCode::Connection: return "connection failure";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Remote: return "remote error";
    case ErrorCode::Contract: return "contract violation";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace lfqa
