#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace surfspec {

/// Broad failure classes; the CLI maps these onto exit codes and JSON error
/// categories.
enum class ErrorCategory { io, parse, geometry, solve, empty_interface, config };

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

/// Text-format error. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IndexRangeError : public ParseError {
public:
  IndexRangeError(std::size_t line, long long index, std::size_t vertex_count);
};

class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& message) : Error(ErrorCategory::geometry, message) {}
};

class SolveError : public Error {
public:
  explicit SolveError(const std::string& message) : Error(ErrorCategory::solve, message) {}
};

class EmptyInterfaceError : public Error {
public:
  explicit EmptyInterfaceError(const std::string& message)
      : Error(ErrorCategory::empty_interface, message) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

}  // namespace surfspec
