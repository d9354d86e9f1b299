#pragma once

#include <vector>

#include "fas/numerics/tensor.hpp"

// Dense kernels used by the model. Matrix products run on Eigen's blocked
// GEMM (OpenMP-threaded for large products); row-wise operations are
// OpenMP-parallel over rows once the work pays for the fork. fas::reference
// holds the plain serial versions the tests and benchmarks compare against.
namespace fas::kernels {

/// a·b for a [m×k], b [k×n]. Throws ErrorKind::dimension on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);
/// aᵀ·b for a [k×m], b [k×n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a·bᵀ for a [m×k], b [n×k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// out += aᵀ·b. Used for weight-gradient accumulation.
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out);
/// out += column sums of a.
void colsum_acc(const Tensor& a, Tensor& out);
/// x += bias broadcast over rows.
void add_row_bias(Tensor& x, const Tensor& bias);

/// Row-wise softmax, stabilized by subtracting the row maximum.
Tensor softmax_rows(const Tensor& x);
/// Vector-Jacobian product of softmax_rows given its output y.
Tensor softmax_rows_backward(const Tensor& y, const Tensor& dy);

struct LayerNormCache {
  Tensor xhat;               // normalized input, pre-affine
  std::vector<double> rstd;  // 1/sqrt(var+eps) per row, 0 for a guarded constant row
};

/// Normalizes over the last axis. A row whose variance+eps is zero maps to bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps,
                  LayerNormCache* cache = nullptr);
/// Returns dx and accumulates dgain/dbias. With exact=false the projection
/// term is dropped, which yields a deliberately wrong gradient for
/// gradient-check mutation testing.
Tensor layer_norm_backward(const Tensor& dy, const Tensor& gain, const LayerNormCache& cache,
                           Tensor& dgain, Tensor& dbias, bool exact = true);

/// Exact GELU, x·Φ(x).
double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;
/// Elementwise GELU; when slope is given it receives GELU'(x) as well.
Tensor gelu(const Tensor& x, Tensor* slope = nullptr);

}  // namespace fas::kernels

namespace fas::reference {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

}  // namespace fas::reference
