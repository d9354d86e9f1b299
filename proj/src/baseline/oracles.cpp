#include "fas/baseline/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fas/error.hpp"
#include "fas/numerics/kernels.hpp"

namespace fas {
namespace {

constexpr double kPinvTolerance = 1e-10;

Tensor submatrix(const Tensor& m, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& cols) {
  Tensor out({rows.size(), cols.size()});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

// (S + σ²I)^+ for symmetric S via eigendecomposition.
Tensor regularized_inverse(const Tensor& s, double noise_var, bool& singular) {
  const auto n = static_cast<Eigen::Index>(s.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = s(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) + (i == j ? noise_var : 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric, "LMMSE: eigendecomposition of the observed block failed");
  }
  const auto& ev = solver.eigenvalues();
  const double cutoff = kPinvTolerance * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv(n);
  singular = false;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ev(k) > cutoff) {
      inv(k) = 1.0 / ev(k);
    } else {
      inv(k) = 0.0;
      singular = true;
    }
  }
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const Eigen::MatrixXd result = u * inv.asDiagonal() * u.transpose();
  Tensor out({s.rows(), s.rows()});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = result(i, j);
  return out;
}

void check_sigma(const Tensor& sigma, const MaskPartition& partition) {
  if (sigma.rank() != 2 || sigma.rows() != sigma.cols() ||
      sigma.rows() != partition.port_count()) {
    throw Error(ErrorKind::dimension, "LMMSE: covariance " + shape_string(sigma.shape()) +
                                          " does not match " +
                                          std::to_string(partition.port_count()) + " ports");
  }
}

}  // namespace

MaskPartition MaskPartition::from_observed(std::size_t port_count,
                                           std::vector<std::size_t> observed) {
  std::sort(observed.begin(), observed.end());
  if (std::adjacent_find(observed.begin(), observed.end()) != observed.end()) {
    throw Error(ErrorKind::config, "observed port list contains duplicates");
  }
  if (observed.empty()) throw Error(ErrorKind::config, "at least one port must be observed");
  if (observed.back() >= port_count) {
    throw Error(ErrorKind::config, "observed port " + std::to_string(observed.back()) +
                                       " out of range for " + std::to_string(port_count) +
                                       " ports");
  }
  if (observed.size() == port_count) {
    throw Error(ErrorKind::config, "at least one port must be masked");
  }
  MaskPartition p;
  p.masked.reserve(port_count - observed.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < port_count; ++i) {
    if (k < observed.size() && observed[k] == i) {
      ++k;
    } else {
      p.masked.push_back(i);
    }
  }
  p.observed = std::move(observed);
  return p;
}

Tensor gather_rows(const Tensor& full, const std::vector<std::size_t>& ports) {
  Tensor out({ports.size(), full.cols()});
  for (std::size_t r = 0; r < ports.size(); ++r) {
    const auto src = full.row(ports[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void scatter_rows(Tensor& full, const std::vector<std::size_t>& ports, const Tensor& rows) {
  for (std::size_t r = 0; r < ports.size(); ++r) {
    const auto src = rows.row(r);
    std::copy(src.begin(), src.end(), full.row(ports[r]).begin());
  }
}

LmmseWeights lmmse_weights(const Tensor& sigma, const MaskPartition& partition, double noise_var) {
  check_sigma(sigma, partition);
  if (!(noise_var >= 0.0)) throw Error(ErrorKind::config, "LMMSE: noise variance must be >= 0");
  LmmseWeights w;
  const Tensor s_bb = submatrix(sigma, partition.observed, partition.observed);
  const Tensor s_ab = submatrix(sigma, partition.masked, partition.observed);
  const Tensor inv = regularized_inverse(s_bb, noise_var, w.used_pseudo_inverse);
  w.weights = kernels::matmul(s_ab, inv);
  return w;
}

LmmseEstimate lmmse_extrapolate(const Tensor& sigma, const MaskPartition& partition,
                                const Tensor& observed_values, double noise_var) {
  if (observed_values.rank() != 2 || observed_values.rows() != partition.observed.size()) {
    throw Error(ErrorKind::dimension, "LMMSE: observed values " +
                                          shape_string(observed_values.shape()) + " vs " +
                                          std::to_string(partition.observed.size()) +
                                          " observed ports");
  }
  const LmmseWeights w = lmmse_weights(sigma, partition, noise_var);
  return {kernels::matmul(w.weights, observed_values), w.used_pseudo_inverse};
}

double analytic_lmmse_nmse(const Tensor& sigma, const MaskPartition& partition, double noise_var) {
  const LmmseWeights w = lmmse_weights(sigma, partition, noise_var);
  const Tensor s_ba = submatrix(sigma, partition.observed, partition.masked);
  double trace_aa = 0.0;
  double explained = 0.0;
  for (std::size_t i = 0; i < partition.masked.size(); ++i) {
    trace_aa += sigma(partition.masked[i], partition.masked[i]);
    for (std::size_t k = 0; k < partition.observed.size(); ++k)
      explained += w.weights(i, k) * s_ba(k, i);
  }
  return std::max(0.0, (trace_aa - explained) / trace_aa);
}

Tensor nearest_neighbor_extrapolate(const PortGrid& grid, const MaskPartition& partition,
                                    const Tensor& observed_values) {
  if (observed_values.rows() != partition.observed.size()) {
    throw Error(ErrorKind::dimension, "nearest neighbor: observed values do not match partition");
  }
  const auto pos = port_positions(grid);
  Tensor out({partition.masked.size(), observed_values.cols()});
  for (std::size_t a = 0; a < partition.masked.size(); ++a) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    // observed is ascending, so a strict improvement keeps the lowest index on
    // ties; the 1e-12 relative slack absorbs roundoff between equal distances
    for (std::size_t b = 0; b < partition.observed.size(); ++b) {
      const double d = distance(pos[partition.masked[a]], pos[partition.observed[b]]);
      if (b == 0 || d < best_d * (1.0 - 1e-12)) {
        best_d = d;
        best = b;
      }
    }
    const auto src = observed_values.row(best);
    std::copy(src.begin(), src.end(), out.row(a).begin());
  }
  return out;
}

}  // namespace fas
