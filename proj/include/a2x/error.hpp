#pragma once

#include <stdexcept>
#include <string>

namespace a2x {

enum class ErrorKind {
  kValidation,   // a value violates a type invariant
  kFormat,       // malformed container or JSON
  kTruncated,    // container ended early
  kParameter,    // bad argument to an operation
  kInfeasible,   // no solution satisfies the constraints
  kGuard,        // instance exceeds a configured size guard
  kIo,           // file could not be opened / written
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace a2x
