#pragma once

#include <stdexcept>
#include <string>

namespace aau {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument / precondition violation on an API call.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Bad run configuration (unknown keys, impossible splits, empty cohorts).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based data row and offending column.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, long row, std::string column)
        : Error(msg + " (row " + std::to_string(row) + ", column " + column + ")"),
          row_(row),
          column_(std::move(column)) {}

    long row() const { return row_; }
    const std::string& column() const { return column_; }

  private:
    long row_;
    std::string column_;
};

/// Record cannot be encoded against a fitted encoder (unknown category, too many carriers).
class EncodingError : public Error {
  public:
    using Error::Error;
};

/// Model file unreadable, corrupt, or of an unsupported version.
class ModelIoError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure (non-finite loss during training).
class NumericError : public Error {
  public:
    NumericError(const std::string& msg, int epoch, int batch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
          epoch_(epoch),
          batch_(batch) {}

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

  private:
    int epoch_;
    int batch_;
};

} // namespace aau
