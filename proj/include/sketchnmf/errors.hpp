#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sketchnmf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// QR hit a column whose residual after orthogonalization is negligible.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(std::size_t column)
      : Error("rank deficient at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class InvalidDim : public Error {
 public:
  using Error::Error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

/// Data expected to be entrywise nonnegative is not.
class NegativeData : public Error {
 public:
  NegativeData(std::size_t row, std::size_t col)
      : Error("negative entry at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Shift sigma below the value that certifies the MU nonnegativity hypothesis.
class InsufficientSigma : public Error {
 public:
  InsufficientSigma(std::string side, double given, double required)
      : Error("insufficient sigma on " + side + " side: " + std::to_string(given) + " < " +
              std::to_string(required)),
        side_(std::move(side)),
        required_(required) {}
  const std::string& side() const noexcept { return side_; }
  double required() const noexcept { return required_; }

 private:
  std::string side_;
  double required_;
};

class LambdaOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonFiniteUpdate : public Error {
 public:
  using Error::Error;
};

class UncertifiedProblem : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimOverflow : public Error {
 public:
  using Error::Error;
};

class ZeroData : public Error {
 public:
  using Error::Error;
};

class ZeroFactors : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sketchnmf
