#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ancheck {

// Base of every error raised while reading an annotation file. Positions are
// 1-based; a zero line means the error has no single source location.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::size_t line, std::size_t col, const std::string& message)
      : std::runtime_error(format(line, col, message)),
        line_(line),
        col_(col),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t col() const { return col_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(std::size_t line, std::size_t col,
                            const std::string& message) {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }

  std::size_t line_;
  std::size_t col_;
  std::string message_;
};

class SyntaxError : public SpecError {
 public:
  using SpecError::SpecError;
};

// A name-carrying error (dangling reference, duplicate, unknown identifier).
class NameError : public SpecError {
 public:
  NameError(std::size_t line, std::size_t col, const std::string& message,
            std::string name)
      : SpecError(line, col, message), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ResolutionError : public NameError {
 public:
  ResolutionError(std::size_t line, std::size_t col, std::string name)
      : NameError(line, col, "unresolved generator '" + name + "'", name) {}
};

class DuplicateError : public NameError {
 public:
  DuplicateError(std::size_t line, std::size_t col, std::string name)
      : NameError(line, col, "duplicate name '" + name + "'", name) {}
};

class UnknownIdentifier : public NameError {
 public:
  UnknownIdentifier(std::size_t line, std::size_t col, std::string name)
      : NameError(line, col, "unknown identifier '" + name + "'", name) {}
};

}  // namespace ancheck
