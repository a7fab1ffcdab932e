#pragma once

#include <stdexcept>
#include <string>

namespace sands {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with the input data itself (missing file, bad rows, bad labels).
// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonFiniteError : public DataError {
 public:
  using DataError::DataError;
};

class SingleClassError : public DataError {
 public:
  using DataError::DataError;
};

class SplitInfeasible : public DataError {
 public:
  using DataError::DataError;
};

class FoldInfeasible : public DataError {
 public:
  using DataError::DataError;
};

class UnknownClass : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateClass : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class AlphaMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class IncompatibleMethod : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

class FitFailed : public Error {
 public:
  using Error::Error;
};

// Every kernel candidate scored at or below the rejection threshold.
class NoSuitableKernel : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace sands
