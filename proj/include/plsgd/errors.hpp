#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace plsgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem definition violates its own invariants (e.g. all-zero spectrum).
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

/// Bad argument to an operation (negative envelope inputs, delta out of range...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Minibatch larger than the dataset, or otherwise malformed batch request.
class InvalidBatch : public Error {
 public:
  using Error::Error;
};

/// Non-finite input or output in a numeric kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Quadrature failed to reach its agreement tolerance.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// SGD gap exceeded the divergence threshold.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, double gap)
      : Error("divergence at t=" + std::to_string(step) +
              " (gap=" + std::to_string(gap) + ")"),
        step_(step),
        gap_(gap) {}

  std::int64_t step() const { return step_; }
  double gap() const { return gap_; }

 private:
  std::int64_t step_;
  double gap_;
};

/// Configuration error; `key()` names the offending key (dotted path).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace plsgd
