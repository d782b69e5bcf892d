#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace assortgen {

enum class ErrorKind {
  SelfLoop,
  MultiEdge,
  NodeOutOfRange,
  Parse,
  InvalidArgument,
  InvalidAction,
  Degenerate,
  Exhausted,
  FrozenGraph,
  NotConverged,
  Infeasible,
  ShapeMismatch,
  NonFinite,
  Config,
  Io,
  MissingCheckpoint,
  UnsupportedVersion,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SelfLoop: return "self-loop";
    case ErrorKind::MultiEdge: return "multiedge";
    case ErrorKind::NodeOutOfRange: return "node out of range";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InvalidAction: return "invalid action";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Exhausted: return "proposal budget exhausted";
    case ErrorKind::FrozenGraph: return "frozen graph";
    case ErrorKind::NotConverged: return "not converged";
    case ErrorKind::Infeasible: return "infeasible target";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::MissingCheckpoint: return "missing checkpoint";
    case ErrorKind::UnsupportedVersion: return "unsupported format version";
    case ErrorKind::Internal: return "internal error";
  }
  return "unknown";
}

}  // namespace assortgen
