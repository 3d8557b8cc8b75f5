#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etas {

/// Malformed catalogue input. `line()` is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Arguments outside the mathematical domain of an operation
/// (p <= 1, x outside a prior's support, parent after T2, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a value that cannot be used (log of zero
/// intensity, overflow in the linearized objective, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace etas
