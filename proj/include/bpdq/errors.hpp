#pragma once

#include <stdexcept>
#include <string>

namespace bpdq {

/// Thrown when an iterative routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

/// Thrown when a randomized generator cannot produce a valid sample
/// (e.g. ellipse placement keeps colliding).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bpdq
