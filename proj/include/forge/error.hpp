#pragma once

#include <stdexcept>
#include <string>

namespace forge {

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Validation = 1,
  Resource = 2,
  Io = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

/// Missing or inconsistent configuration (e.g. an area table without an entry).
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& what) : ValidationError(what) {}
};

/// A netlist does not fit the requested CGP grid.
class CapacityError : public ValidationError {
 public:
  CapacityError(const std::string& what, std::size_t required_columns)
      : ValidationError(what), required_columns_(required_columns) {}
  std::size_t required_columns() const noexcept { return required_columns_; }

 private:
  std::size_t required_columns_;
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(ErrorKind::Resource, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace forge
