#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tc {

/// Operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-supplied value is outside the accepted domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stored indices or codes reference entries that do not exist.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A layer has nothing left to compress (e.g. every weight was pruned).
class DegenerateLayerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model cannot be represented by the container (e.g. column index overflow).
class FormatCapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DecodeErrorKind {
  bad_magic,
  unsupported_version,
  truncated,
  checksum_mismatch,
  out_of_range,
  malformed,
};

const char* to_string(DecodeErrorKind kind) noexcept;

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  DecodeErrorKind kind() const noexcept { return kind_; }

 private:
  DecodeErrorKind kind_;
};

/// Malformed tabular input. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(row) +
                           (column ? ", column " + std::to_string(column) : std::string()) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// A binary detection task cannot be built from the given data.
class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration failed validation. `field` is the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace tc
