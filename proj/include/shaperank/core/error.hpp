#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shaperank {

// Bad input data or configuration (missing file, malformed record,
// degenerate geometry). CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver ran out of iterations. Carries the diagnostics of the
// last iterate so callers can inspect how close it got. CLI exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm, int iterations,
                   std::vector<double> last_iterate = {})
      : std::runtime_error(what),
        gradient_norm(gradient_norm),
        iterations(iterations),
        last_iterate(std::move(last_iterate)) {}

  double gradient_norm;
  int iterations;
  std::vector<double> last_iterate;
};

}  // namespace shaperank
