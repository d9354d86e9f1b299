#pragma once

#include <cstddef>
#include <vector>

#include "fas/baseline/oracles.hpp"
#include "fas/numerics/rng.hpp"

namespace fas {

/// Which ports are observed for one extrapolation instance.
struct MaskSpec {
  std::size_t port_count = 0;
  double mask_ratio = 0.0;
  std::vector<std::size_t> observed;  // ascending
  std::vector<std::size_t> masked;    // ascending complement; empty only on the all-observed path

  /// Number of observed ports for a mask ratio: round(N_S·(1 − M_r)).
  static std::size_t observed_count(std::size_t port_count, double mask_ratio);

  /// Builds a spec from an explicit observed set (any order, no duplicates).
  static MaskSpec from_observed(std::size_t port_count, std::vector<std::size_t> observed);

  /// Every port observed. Only meaningful for forward-pass checks.
  static MaskSpec all_observed(std::size_t port_count);

  MaskPartition partition() const;
};

/// Uniformly samples round(N_S·(1 − M_r)) observed ports without replacement.
/// Throws ErrorKind::config unless 0 < M_r < 1 and at least one port is
/// observed and one masked.
MaskSpec make_mask(std::size_t port_count, double mask_ratio, RngStream& rng);

/// Mask ratio for an observed percentage, e.g. 25 → 0.75.
inline double mask_ratio_for_percent(double observed_percent) {
  return 1.0 - observed_percent / 100.0;
}

}  // namespace fas
