#include "fas/channel/sampling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fas/error.hpp"
#include "fas/numerics/kernels.hpp"

namespace fas {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

ChannelFactors factorize(const Tensor& sigma, double delta2) {
  if (sigma.rank() != 2 || sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorKind::dimension,
                "factorize: expected a square matrix, got " + shape_string(sigma.shape()));
  }
  if (!(delta2 >= 0.0)) {
    throw Error(ErrorKind::config, "factorize: path loss must be non-negative");
  }
  const std::size_t n = sigma.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-9) {
        throw Error(ErrorKind::numeric, "factorize: matrix is not symmetric at (" +
                                            std::to_string(i) + ", " + std::to_string(j) + ")");
      }

  const Eigen::Map<const RowMatrix> s(sigma.data(), static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric, "factorize: eigendecomposition did not converge");
  }

  ChannelFactors f;
  f.sigma = sigma;
  f.delta2 = delta2;
  f.eigenvectors = Tensor({n, n});
  const Eigen::MatrixXd& u = solver.eigenvectors();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      f.eigenvectors(i, j) = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  const auto& ev = solver.eigenvalues();
  const double max_ev = ev.maxCoeff();
  const double floor = 1e-12 * std::max(max_ev, 0.0);
  f.eigenvalues.resize(n);
  f.sqrt_eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = ev(static_cast<Eigen::Index>(k));
    f.eigenvalues[k] = lam < floor ? 0.0 : lam;
    f.sqrt_eigenvalues[k] = std::sqrt(f.eigenvalues[k]);
  }

  f.mixing = Tensor({n, n});
  const double amp = std::sqrt(delta2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      f.mixing(i, k) = amp * f.eigenvectors(i, k) * f.sqrt_eigenvalues[k];
  return f;
}

double reconstruction_error(const ChannelFactors& factors) {
  const std::size_t n = factors.port_count();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double r = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        r += factors.eigenvectors(i, k) * factors.eigenvalues[k] * factors.eigenvectors(j, k);
      const double d = factors.sigma(i, j) - r;
      num += d * d;
      den += factors.sigma(i, j) * factors.sigma(i, j);
    }
  return std::sqrt(num / den);
}

Tensor sample_channel(const ChannelFactors& factors, std::size_t m_antennas, RngStream& rng) {
  if (m_antennas < 1) {
    throw Error(ErrorKind::config, "sample_channel: need at least one BS antenna");
  }
  const std::size_t n = factors.port_count();
  Tensor gaussian({n, 2 * m_antennas});
  const double half = std::sqrt(0.5);
  for (double& v : gaussian.values()) v = half * rng.normal();
  // The same real mixing matrix acts on the real and imaginary columns.
  return kernels::matmul(factors.mixing, gaussian);
}

double mean_complex_power(const Tensor& sample) {
  double s = 0.0;
  for (double v : sample.values()) s += v * v;
  return s / (0.5 * static_cast<double>(sample.size()));
}

double awgn_variance(const Tensor& sample, double snr_db) {
  return mean_complex_power(sample) / std::pow(10.0, snr_db / 10.0);
}

Tensor add_awgn(const Tensor& sample, std::optional<double> snr_db, RngStream& rng) {
  if (!snr_db) return sample;
  if (!std::isfinite(*snr_db)) {
    throw Error(ErrorKind::config, "add_awgn: SNR must be finite");
  }
  const double sd = std::sqrt(0.5 * awgn_variance(sample, *snr_db));
  Tensor noisy = sample;
  for (double& v : noisy.values()) v += sd * rng.normal();
  return noisy;
}

}  // namespace fas
