#pragma once

#include <stdexcept>
#include <string>

namespace regimecast {

// Error categories surface in the CLI's machine-readable error JSON.
enum class ErrorKind {
  schema,
  duplicate,
  range,
  gap,
  domain,
  parameter,
  length,
  size,
  design,
  convergence,
  empty,
  undefined,
  validation,
  io,
  flagged,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::range: return "range";
    case ErrorKind::gap: return "gap";
    case ErrorKind::domain: return "domain";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::length: return "length";
    case ErrorKind::size: return "size";
    case ErrorKind::design: return "design";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::empty: return "empty";
    case ErrorKind::undefined: return "undefined";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
    case ErrorKind::flagged: return "flagged";
  }
  return "unknown";
}

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

}  // namespace regimecast
