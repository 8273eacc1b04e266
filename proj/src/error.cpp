#include "mmd/error.hpp"

namespace mmd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::UnknownToken: return "unknown-token";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Training: return "training";
    case ErrorKind::Data: return "data";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace mmd
