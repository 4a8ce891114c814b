#pragma once

#include <stdexcept>
#include <string>

namespace gzk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// An iterative solver (Petviashvili, CG, Lanczos, Newton) failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// The solution left the regime where the modulation decomposition exists.
class ModulationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or H1 growth past the blow-up threshold during time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double t, double h1)
      : Error(what), t_(t), h1_(h1) {}
  double time() const noexcept { return t_; }
  double h1_norm() const noexcept { return h1_; }

 private:
  double t_;
  double h1_;
};

/// A diagnostic was asked to evaluate outside its periodic validity window.
class WindowError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gzk
