#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lts {

enum class ErrorKind {
  Io,                   // file could not be opened / written
  MalformedFile,        // byte count or layout does not fit the format
  MalformedPoint,       // non-finite coordinate
  Parse,                // text could not be tokenized / converted
  Validation,           // value parsed but violates a domain invariant
  Format,               // wrong magic, version or truncated payload
  InvalidDistribution,  // score row does not sum to one
  Range,                // entry outside its admissible interval
  DimensionMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` lets callers (the CLI in
/// particular) tell user-input problems from internal ones.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lts
