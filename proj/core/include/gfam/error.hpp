#pragma once

#include <stdexcept>
#include <string>

namespace gfam {

enum class ErrorKind {
  Config,
  Alignment,
  ProtocolViolation,
  PrimitiveBinding,
  OutOfMemory,
  Backpressure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what) : Error(ErrorKind::Alignment, what) {}
};

// Raised when a caller breaks a coherence-layer precondition, e.g. a store
// hit on a line that was never upgraded. Always indicates a simulator bug.
class ProtocolViolation : public Error {
 public:
  explicit ProtocolViolation(const std::string& what)
      : Error(ErrorKind::ProtocolViolation, what) {}
};

class PrimitiveBindingError : public Error {
 public:
  explicit PrimitiveBindingError(const std::string& what)
      : Error(ErrorKind::PrimitiveBinding, what) {}
};

class OutOfMemoryError : public Error {
 public:
  explicit OutOfMemoryError(const std::string& what) : Error(ErrorKind::OutOfMemory, what) {}
};

class BackpressureError : public Error {
 public:
  explicit BackpressureError(const std::string& what) : Error(ErrorKind::Backpressure, what) {}
};

}  // namespace gfam
