#pragma once

#include <optional>
#include <vector>

#include "fas/numerics/rng.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

/// Eigen-factorization of a correlation matrix, ready for channel sampling.
struct ChannelFactors {
  Tensor sigma;                      // N_S×N_S correlation
  Tensor eigenvectors;               // U, columns are eigenvectors
  std::vector<double> eigenvalues;   // ascending, after clamping
  std::vector<double> sqrt_eigenvalues;
  double delta2 = 1.0;               // path loss
  Tensor mixing;                     // sqrt(δ²)·U·diag(sqrtA)

  std::size_t port_count() const noexcept { return sigma.rows(); }
};

/// Symmetric eigendecomposition Σ = U·A·Uᵀ. Eigenvalues below
/// 1e-12·max-eigenvalue (including small negatives from roundoff) are
/// clamped to zero. Throws ErrorKind::numeric when Σ is not symmetric to 1e-9.
ChannelFactors factorize(const Tensor& sigma, double delta2);

/// ||Σ - U·A·Uᵀ||_F / ||Σ||_F.
double reconstruction_error(const ChannelFactors& factors);

/// One channel realization g = sqrt(δ²)·U·sqrt(A)·G, stored as N_S×2M reals with
/// columns interleaved [Re_1, Im_1, ..., Re_M, Im_M]. Real and imaginary parts of
/// G are independent N(0, 1/2).
Tensor sample_channel(const ChannelFactors& factors, std::size_t m_antennas, RngStream& rng);

/// Mean power per complex entry: sum of squares over all reals / (N_S·M).
double mean_complex_power(const Tensor& sample);

/// Complex noise variance for the sample at the given SNR (dB).
double awgn_variance(const Tensor& sample, double snr_db);

/// Adds complex white noise at the given SNR relative to this sample's own
/// mean power: each real component gets N(0, σ²/2). std::nullopt means no
/// noise and returns the input unchanged.
Tensor add_awgn(const Tensor& sample, std::optional<double> snr_db, RngStream& rng);

}  // namespace fas
