#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfqa {

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  Parse,
  Format,
  DuplicateId,
  NotFound,
  DimMismatch,
  Budget,
  Connection,
  Timeout,
  Remote,
  Contract,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the engine carries a category so the C API can
/// translate it to a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace lfqa
