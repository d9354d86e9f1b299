#include "fas/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace fas {

GradCheckReport grad_check(const LossFn& loss, std::span<Parameter> params,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  if (params.empty()) return report;

  loss(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter& p : params) analytic.push_back(p.grad);

  RngStream rng(options.seed, "gradcheck");
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params[pi];
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      // partial Fisher-Yates
      for (std::size_t i = 0; i < options.max_coords_per_param; ++i) {
        const std::size_t j = i + rng.below(coords.size() - i);
        std::swap(coords[i], coords[j]);
      }
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t idx : coords) {
      const double saved = p.value[idx];
      p.value[idx] = saved + options.eps;
      const double up = loss(false);
      p.value[idx] = saved - options.eps;
      const double down = loss(false);
      p.value[idx] = saved;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[pi][idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_error || !std::isfinite(rel)) {
        report.max_rel_error = std::isfinite(rel) ? rel : HUGE_VAL;
        report.worst_param = p.name;
        report.worst_index = idx;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  // leave the analytic gradients in place for the caller
  for (std::size_t pi = 0; pi < params.size(); ++pi) params[pi].grad = analytic[pi];
  return report;
}

}  // namespace fas
