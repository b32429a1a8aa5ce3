#pragma once

#include <stdexcept>
#include <string>

namespace dab {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/graph shape mismatches: reported with both shapes in the message.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf escaped a computation, or a domain precondition was violated
// (negative distance, log of a nonpositive value, ...).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Bad file contents: wrong magic, version mismatch, truncation, or a
// deserialized object that violates its own invariants.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Rejected run configuration. All schema violations are collected into one
// message so the user sees everything wrong at once.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace dab
