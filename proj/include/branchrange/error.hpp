#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace branchrange {

enum class ErrorKind {
  InvalidParams,
  DimensionMismatch,
  ZeroOrNegativeDisparity,
  NonPositiveDepth,
  WindowTooLarge,
  ParseError,
  IoError,
  EmptyMask,
  DegenerateMask,
  TooFewPoints,
  EmptyInput,
  NoValidDepths,
  SpecInvalid,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library surfaces as this exception; `kind()` lets
/// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace branchrange
