#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orlicz {

enum class ErrorKind {
  DomainCapExceeded,
  SupremumOutOfRange,
  InvalidExponents,
  InvalidArgument,
  GridMismatch,
  EmptyTail,
  UndeterminedGrowth,
  BoundaryNotZero,
  AtomTooCloseToBoundary,
  NonConvergence,
  NotStronglyMonotone,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainCapExceeded: return "DomainCapExceeded";
    case ErrorKind::SupremumOutOfRange: return "SupremumOutOfRange";
    case ErrorKind::InvalidExponents: return "InvalidExponents";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::EmptyTail: return "EmptyTail";
    case ErrorKind::UndeterminedGrowth: return "UndeterminedGrowth";
    case ErrorKind::BoundaryNotZero: return "BoundaryNotZero";
    case ErrorKind::AtomTooCloseToBoundary: return "AtomTooCloseToBoundary";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NotStronglyMonotone: return "NotStronglyMonotone";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace orlicz
