#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace egopriv {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  MissingEmbedding,
  MalformedFile,
  InvalidLabel,
  EmptyInput,
  MissingField,
  NumericError,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Every module error goes through this type so the CLI can print
// "error <code>: <message>" on one line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace egopriv
