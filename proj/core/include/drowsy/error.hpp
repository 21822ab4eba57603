#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drowsy {

/// Root of every exception thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single record (line, element, token) could not be decoded.
class ParseError : public Error {
 public:
  /// Line 0 means "not line-oriented input".
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Records decode individually but violate a stream-level ordering rule.
class StreamError : public Error {
 public:
  explicit StreamError(const std::string& what) : Error(what), line_(0) {}
  StreamError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data is well-formed but unusable (e.g. a single-class dataset).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value met inside the numeric core. `index` names the
/// offending sequence (or step) when known.
class NumericError : public Error {
 public:
  NumericError(std::size_t index, const std::string& what)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace drowsy
