#pragma once

#include <stdexcept>
#include <string>

namespace rtomo {

/// Raised when an iterative solve misses its tolerance within the iteration cap,
/// or diverges.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), residual_(achieved_residual) {}
  [[nodiscard]] double achieved_residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace rtomo
