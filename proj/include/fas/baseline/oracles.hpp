#pragma once

#include <cstddef>
#include <vector>

#include "fas/channel/grid.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

/// Observed (B) / masked (A) split of the ports. Both sorted, disjoint,
/// non-empty, and together covering [0, N_S).
struct MaskPartition {
  std::vector<std::size_t> observed;
  std::vector<std::size_t> masked;

  /// Builds the complement of `observed`. Throws ErrorKind::config if the
  /// result would violate the invariants.
  static MaskPartition from_observed(std::size_t port_count, std::vector<std::size_t> observed);
  std::size_t port_count() const noexcept { return observed.size() + masked.size(); }
};

/// Rows of `full` at the given ports, in the given order.
Tensor gather_rows(const Tensor& full, const std::vector<std::size_t>& ports);

/// Linear interpolator W = Σ_AB (Σ_BB + σ²I)^+ of shape |A|×|B|.
struct LmmseWeights {
  Tensor weights;
  bool used_pseudo_inverse = false;  // Σ_BB + σ²I was numerically singular
};

LmmseWeights lmmse_weights(const Tensor& sigma, const MaskPartition& partition, double noise_var);

struct LmmseEstimate {
  Tensor estimate;  // |A|×2M
  bool used_pseudo_inverse = false;
};

/// ĝ_A = Σ_AB (Σ_BB + σ²I)^{-1} u_b applied to every (Re, Im) column of u_b.
/// Falls back to a pseudo-inverse (relative tolerance 1e-10) when the system
/// is singular and flags it in the result.
LmmseEstimate lmmse_extrapolate(const Tensor& sigma, const MaskPartition& partition,
                                const Tensor& observed_values, double noise_var);

/// tr(Σ_AA − Σ_AB(Σ_BB+σ²I)^{-1}Σ_BA) / tr(Σ_AA): the expected masked-port NMSE
/// of the LMMSE estimator.
double analytic_lmmse_nmse(const Tensor& sigma, const MaskPartition& partition, double noise_var);

/// Each masked port copies the nearest observed port's CSI (ties → lowest index).
Tensor nearest_neighbor_extrapolate(const PortGrid& grid, const MaskPartition& partition,
                                    const Tensor& observed_values);

/// Writes `rows` into `full` at the given ports.
void scatter_rows(Tensor& full, const std::vector<std::size_t>& ports, const Tensor& rows);

}  // namespace fas
