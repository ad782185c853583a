#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermoforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed notation string; carries the zero-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Structurally invalid input (duplicate labels, cycles, missing loads, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Enumeration request larger than the configured cap.
class CapExceededError : public Error {
 public:
  CapExceededError(const std::string& what, int cap) : Error(what), cap_(cap) {}

  [[nodiscard]] int cap() const noexcept { return cap_; }

 private:
  int cap_;
};

/// Integrator gave up (step size underflow).
class StiffnessError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermoforge
