#pragma once

#include <cstdint>
#include <string>

#include "absa/optim.hpp"

namespace absa {

enum class Differencing {
  kCentral,  // (f(x + eps) - f(x - eps)) / 2 eps
  // Central differences over steps eps, eps/1.4, eps/1.4^2, ... with
  // polynomial extrapolation to step 0; keeps the estimate with the smallest
  // internal error. Resolves gradients far below the round-off floor of a
  // single central difference.
  kRidders,
};

struct GradCheckOptions {
  Differencing method = Differencing::kRidders;
  // Step for kCentral; initial (largest) step for kRidders.
  double epsilon = 3e-3;
  // Coordinates checked per parameter; 0 checks all of them.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

// Compares backprop gradients to numeric derivatives over store coordinates.
// Relative error is |a - n| / max(|a|, |n|, 1e-12). Throws NumericError when a
// perturbed loss is non-finite.
GradCheckResult grad_check(const LossFn& fn, ParamStore& store,
                           const GradCheckOptions& opts = {});

}  // namespace absa
