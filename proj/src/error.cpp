#include "lts/error.hpp"

namespace lts {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io error";
    case ErrorKind::MalformedFile: return "malformed file";
    case ErrorKind::MalformedPoint: return "malformed point";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::InvalidDistribution: return "invalid distribution";
    case ErrorKind::Range: return "range error";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InvalidArgument: return "invalid argument";
  }
  return "error";
}

}  // namespace lts
