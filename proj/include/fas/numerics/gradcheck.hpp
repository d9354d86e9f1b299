#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "fas/numerics/optim.hpp"

namespace fas {

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  /// Denominator floor for the relative error, so coordinates whose true
  /// gradient is ~0 are judged on absolute error tolerance·abs_floor.
  double abs_floor = 1e-5;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
  double tolerance = 0.0;

  bool passed() const noexcept { return max_rel_error < tolerance; }
};

/// Loss callback. With compute_grad the callback must also overwrite every
/// parameter's grad with the analytic gradient of the returned loss.
using LossFn = std::function<double(bool compute_grad)>;

/// Compares analytic gradients against central differences
/// (f(w+eps) - f(w-eps)) / (2 eps). Parameter values are restored exactly.
GradCheckReport grad_check(const LossFn& loss, std::span<Parameter> params,
                           const GradCheckOptions& options = {});

}  // namespace fas
