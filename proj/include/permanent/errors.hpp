#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace permanent {

/// Input violates an operation's mathematical domain (n = 0, g = 0, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A sparse pair, plan or partial set is internally inconsistent.
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// The computation needs a kernel on a matrix with n > 63.
class ImpossibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Task-count or wall-clock limit exceeded.
class TimeoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A run was stopped by an external request (signal).
class InterruptedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace permanent
