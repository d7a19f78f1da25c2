#pragma once

#include <stdexcept>
#include <string>

namespace alphascreen {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent or insufficient matrix/panel dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient design in a least-squares solve.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  // Ratio largest / smallest singular value of the offending design
  // (infinity when the smallest is exactly zero).
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// Violated precondition on an argument (asymmetric input, p-values out of
// range, beta outside (0,1), ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// The adjusted-return spectrum has no eigenvalue above the degeneracy floor.
class NoFactorStructureError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Invalid user configuration (scenario file, CLI options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alphascreen
