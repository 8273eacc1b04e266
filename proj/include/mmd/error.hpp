#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmd {

enum class ErrorKind {
  InvalidInput,
  DegenerateInput,
  Config,
  Parse,
  Shape,
  UnknownToken,
  Protocol,
  Training,
  Data,
  NotFound,
  Conflict,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers (and the
/// HTTP layer) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace mmd
