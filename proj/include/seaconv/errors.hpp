#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seaconv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL text. `offset()` is the byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("parse error at offset " + std::to_string(offset) + ": " + message),
        offset_(offset),
        detail_(message) {}

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t offset_;
  std::string detail_;
};

/// Evaluation left the domain of a primitive (log of a negative number,
/// division by zero, ...). `subtree()` is the printed offending node.
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::string subtree)
      : Error(message + (subtree.empty() ? std::string() : " in `" + subtree + "`")),
        subtree_(std::move(subtree)) {}

  [[nodiscard]] const std::string& subtree() const noexcept { return subtree_; }

 private:
  std::string subtree_;
};

/// Adaptive quadrature hit its recursion limit or produced a non-finite value.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A family's hypotheses do not hold for the supplied parameters.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain guards of a solution.
class GuardError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, descriptor, or grid specification.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace seaconv
