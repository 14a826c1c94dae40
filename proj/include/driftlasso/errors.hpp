#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftlasso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition (shape, range, NaN).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The Euler sampler produced a non-finite or exploding state.
class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A matrix expected to have spectrum in the open right half-plane does not.
class UnstableMatrix : public Error {
 public:
  using Error::Error;
};

/// A covariance that should be positive semidefinite is not, beyond round-off.
class NumericDegeneracy : public Error {
 public:
  using Error::Error;
};

/// Eigenvector matrix is singular or too ill-conditioned.
class DiagonalizationFailed : public Error {
 public:
  using Error::Error;
};

/// An audit needs noise or fine-path records that were not captured.
class InstrumentationRequired : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation. `path` is the dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace driftlasso
