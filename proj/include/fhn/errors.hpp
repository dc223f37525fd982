#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the weakly damped regime (kappa <= 0).
class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

/// A simulated state became non-finite.
class SimulationBlowupError : public Error {
 public:
  SimulationBlowupError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Input series cannot be summarized (constant, non-finite, ...).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class InvalidWeightsError : public Error {
 public:
  using Error::Error;
};

/// Factorization or density evaluation failed even after jitter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// All unnormalized importance weights vanished.
class DegeneratePopulationError : public Error {
 public:
  using Error::Error;
};

/// No particle of the previous population survives the new threshold.
class EmptyTruncationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public Error {
 public:
  using Error::Error;
};

class NonNumericCellError : public Error {
 public:
  using Error::Error;
};

class EmptyColumnError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failed filesystem write; the message carries the OS reason.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fhn
