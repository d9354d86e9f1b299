#include "fas/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigen_view.hpp"
#include "fas/error.hpp"

namespace fas::kernels {
namespace {

// Below this many multiply-adds the OpenMP fork/join costs more than it saves.
constexpr long kParallelWork = 1L << 15;

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw Error(ErrorKind::dimension, std::string(op) + ": expected rank-2 tensor, got " +
                                          shape_string(t.shape()));
  }
}

void require_inner(std::size_t lhs, std::size_t rhs, const Tensor& a, const Tensor& b,
                   const char* op) {
  if (lhs != rhs) {
    throw Error(ErrorKind::dimension, std::string(op) + ": inner extents differ, " +
                                          shape_string(a.shape()) + " vs " +
                                          shape_string(b.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  require_inner(a.cols(), b.rows(), a, b, "matmul");
  Tensor c({a.rows(), b.cols()});
  detail::view(c).noalias() = detail::view(a) * detail::view(b);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  Tensor c({a.rank() == 2 ? a.cols() : 0, b.rank() == 2 ? b.cols() : 0});
  matmul_tn_acc(a, b, c);
  return c;
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  require_inner(a.rows(), b.rows(), a, b, "matmul_tn");
  if (out.rank() != 2 || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw Error(ErrorKind::dimension, "matmul_tn: output shape " + shape_string(out.shape()));
  }
  detail::view(out).noalias() += detail::view(a).transpose() * detail::view(b);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  require_inner(a.cols(), b.cols(), a, b, "matmul_nt");
  Tensor c({a.rows(), b.rows()});
  detail::view(c).noalias() = detail::view(a) * detail::view(b).transpose();
  return c;
}

void colsum_acc(const Tensor& a, Tensor& out) {
  if (out.size() != a.cols()) {
    throw Error(ErrorKind::dimension, "colsum: output size " + std::to_string(out.size()) +
                                          " vs " + std::to_string(a.cols()) + " columns");
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
}

void add_row_bias(Tensor& x, const Tensor& bias) {
  if (bias.size() != x.cols()) {
    throw Error(ErrorKind::dimension, "bias size " + std::to_string(bias.size()) + " vs " +
                                          std::to_string(x.cols()) + " columns");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  Tensor y = x;
  const long m = static_cast<long>(x.rows());
#pragma omp parallel for schedule(static) if (m * static_cast<long>(x.cols()) >= kParallelWork)
  for (long r = 0; r < m; ++r) {
    auto row = detail::view(y).row(r).array();
    row = (row - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return y;
}

Tensor softmax_rows_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx(y.shape());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto yr = y.row(r);
    const auto gr = dy.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
    auto out = dx.row(r);
    for (std::size_t c = 0; c < yr.size(); ++c) out[c] = yr[c] * (gr[c] - dot);
  }
  return dx;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps,
                  LayerNormCache* cache) {
  const std::size_t d = x.shape().empty() ? 0 : x.shape().back();
  if (d < 2 || gain.size() != d || bias.size() != d) {
    throw Error(ErrorKind::dimension, "layer_norm: feature size " + std::to_string(d) +
                                          " with gain/bias sizes " +
                                          std::to_string(gain.size()) + "/" +
                                          std::to_string(bias.size()));
  }
  const std::size_t rows = x.size() / d;
  Tensor y(x.shape());
  if (cache) {
    cache->xhat = Tensor(x.shape());
    cache->rstd.assign(rows, 0.0);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * d;
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += xr[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<double>(d);
    const double denom = var + eps;
    const double rstd = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
    double* yr = y.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      const double xh = (xr[c] - mean) * rstd;
      if (cache) cache->xhat[r * d + c] = xh;
      yr[c] = xh * gain[c] + bias[c];
    }
    if (cache) cache->rstd[r] = rstd;
  }
  return y;
}

Tensor layer_norm_backward(const Tensor& dy, const Tensor& gain, const LayerNormCache& cache,
                           Tensor& dgain, Tensor& dbias, bool exact) {
  const std::size_t d = gain.size();
  const std::size_t rows = dy.size() / d;
  Tensor dx(dy.shape());
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = dy.data() + r * d;
    const double* xh = cache.xhat.data() + r * d;
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dgain[c] += g[c] * xh[c];
      dbias[c] += g[c];
      dxhat[c] = g[c] * gain[c];
      mean_dxhat += dxhat[c];
      mean_dxhat_xhat += dxhat[c] * xh[c];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    if (!exact) mean_dxhat_xhat = 0.0;
    double* out = dx.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      out[c] = cache.rstd[r] * (dxhat[c] - mean_dxhat - xh[c] * mean_dxhat_xhat);
    }
  }
  return dx;
}

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) noexcept {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Tensor gelu(const Tensor& x, Tensor* slope) {
  Tensor cdf(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) cdf[i] = 0.5 * (1.0 + std::erf(x[i] / std::numbers::sqrt2));
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::ArrayXd> xv(x.data(), n);
  Eigen::Map<Eigen::ArrayXd> cv(cdf.data(), n);
  if (slope) {
    *slope = Tensor(x.shape());
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    Eigen::Map<Eigen::ArrayXd>(slope->data(), n) =
        cv + xv * (-0.5 * xv.square()).exp() * inv_sqrt_2pi;
  }
  cv *= xv;
  return cdf;
}

}  // namespace fas::kernels
