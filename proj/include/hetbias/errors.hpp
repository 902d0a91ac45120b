#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetbias {

/// Base class for every error raised by the library. CLI maps all of these to
/// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is rank deficient or too ill-conditioned to solve.
class SingularDesignError : public Error {
 public:
  SingularDesignError(const std::string& what, std::vector<std::size_t> columns)
      : Error(what), columns_(std::move(columns)) {}

  /// Zero-based column indices judged to be (near) linearly dependent.
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

class DegenerateCorrelationError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class BootstrapDegeneracyError : public Error {
 public:
  using Error::Error;
};

class ConstantResponseError : public Error {
 public:
  using Error::Error;
};

class UnsolvableEquilibriumError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetbias
