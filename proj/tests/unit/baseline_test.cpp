#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fas/baseline/oracles.hpp"
#include "fas/channel/correlation.hpp"
#include "fas/channel/nmse.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/error.hpp"
#include "fas/numerics/kernels.hpp"
#include "test_util.hpp"

namespace fas {
namespace {

PortGrid grid(std::size_t nx, std::size_t ny, double wx, double wy) {
  return PortGrid{nx, ny, wx, wy, 0.0857};
}

// Every p-th port observed, starting at `offset`.
MaskPartition strided(std::size_t n, std::size_t stride, std::size_t offset = 0) {
  std::vector<std::size_t> obs;
  for (std::size_t p = offset; p < n; p += stride) obs.push_back(p);
  return MaskPartition::from_observed(n, obs);
}

Tensor sub_matrix(const Tensor& s, const std::vector<std::size_t>& rows,
                  const std::vector<std::size_t>& cols) {
  Tensor out({rows.size(), cols.size()});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = s(rows[i], cols[j]);
  return out;
}

double trace(const Tensor& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

TEST(MaskPartition, ComplementAndValidation) {
  const MaskPartition p = MaskPartition::from_observed(6, {4, 1});
  EXPECT_EQ(p.observed, (std::vector<std::size_t>{1, 4}));
  EXPECT_EQ(p.masked, (std::vector<std::size_t>{0, 2, 3, 5}));
  EXPECT_THROW(MaskPartition::from_observed(6, {}), Error);
  EXPECT_THROW(MaskPartition::from_observed(3, {0, 1, 2}), Error);
  EXPECT_THROW(MaskPartition::from_observed(3, {1, 1}), Error);
  EXPECT_THROW(MaskPartition::from_observed(3, {3}), Error);
}

TEST(GatherScatter, RoundTrip) {
  const Tensor full = test::random_tensor({5, 4}, 1);
  const std::vector<std::size_t> ports{3, 0, 4};
  const Tensor rows = gather_rows(full, ports);
  EXPECT_EQ(rows.row(0)[2], full(3, 2));
  Tensor back({5, 4});
  scatter_rows(back, ports, rows);
  for (std::size_t p : ports)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(back(p, c), full(p, c));
  EXPECT_EQ(back(1, 0), 0.0);
}

// ---------------------------------------------------------------------------
// LMMSE

TEST(Lmmse, UncorrelatedPortsPredictZero) {
  const MaskPartition part = MaskPartition::from_observed(5, {1, 3});
  const LmmseEstimate e = lmmse_extrapolate(Tensor::identity(5), part, test::random_tensor({2, 4}, 2), 0.0);
  for (double v : e.estimate.values()) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(analytic_lmmse_nmse(Tensor::identity(5), part, 0.0), 1.0);
}

TEST(Lmmse, PerfectCorrelationCopiesObservedValue) {
  const Tensor ones({4, 4}, 1.0);
  const Tensor u = test::random_tensor({1, 6}, 3);
  const LmmseEstimate e = lmmse_extrapolate(ones, MaskPartition::from_observed(4, {2}), u, 0.0);
  ASSERT_EQ(e.estimate.rows(), 3u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(e.estimate(r, c), u(0, c), 1e-12);
  EXPECT_NEAR(analytic_lmmse_nmse(ones, MaskPartition::from_observed(4, {2}), 0.0), 0.0, 1e-12);
}

TEST(Lmmse, SingularSystemFallsBackToPseudoInverse) {
  const Tensor ones({4, 4}, 1.0);
  const Tensor u = Tensor::matrix(2, 2, {0.7, -0.2, 0.7, -0.2});
  const LmmseEstimate e = lmmse_extrapolate(ones, MaskPartition::from_observed(4, {0, 3}), u, 0.0);
  EXPECT_TRUE(e.used_pseudo_inverse);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(e.estimate(r, 0), 0.7, 1e-9);
    EXPECT_NEAR(e.estimate(r, 1), -0.2, 1e-9);
  }
  const LmmseEstimate noisy = lmmse_extrapolate(ones, MaskPartition::from_observed(4, {0, 3}), u, 0.1);
  EXPECT_FALSE(noisy.used_pseudo_inverse);
}

TEST(Lmmse, MatchesMonteCarloConditionalMean) {
  // 3 ports on a line, λ/4 apart; observe the middle one
  const double lambda = 0.0857;
  const std::vector<Position> pos{{0.0, 0.0}, {lambda / 4, 0.0}, {lambda / 2, 0.0}};
  const Tensor sigma = correlation_matrix(pos, lambda, CorrelationModel::clarke);
  const MaskPartition part = MaskPartition::from_observed(3, {1});
  const double b0 = 0.5;
  const Tensor est = lmmse_extrapolate(sigma, part, Tensor::matrix(1, 1, {b0}), 0.0).estimate;

  // brute force: average the masked ports over joint draws whose observed value lands near b0
  const ChannelFactors f = factorize(sigma, 2.0);
  RngStream rng(11, "conditional");
  double sum0 = 0.0, sum2 = 0.0;
  std::size_t hits = 0;
  for (int k = 0; k < 1000000; ++k) {
    const Tensor g = sample_channel(f, 1, rng);
    for (std::size_t c = 0; c < 2; ++c) {
      if (std::abs(g(1, c) - b0) < 0.03) {
        sum0 += g(0, c);
        sum2 += g(2, c);
        ++hits;
      }
    }
  }
  ASSERT_GT(hits, 10000u);
  EXPECT_NEAR(sum0 / static_cast<double>(hits), est(0, 0), 0.01);
  EXPECT_NEAR(sum2 / static_cast<double>(hits), est(1, 0), 0.01);
}

TEST(Lmmse, LinearInObservations) {
  const Tensor sigma = correlation_matrix(grid(4, 4, 0.04, 0.08), CorrelationModel::clarke);
  const MaskPartition part = strided(16, 3);
  const Tensor u1 = test::random_tensor({part.observed.size(), 4}, 4);
  const Tensor u2 = test::random_tensor({part.observed.size(), 4}, 5);
  const double a = 1.7, b = -0.4;
  const Tensor lhs = lmmse_extrapolate(sigma, part, u1 * a + u2 * b, 0.05).estimate;
  const Tensor rhs = lmmse_extrapolate(sigma, part, u1, 0.05).estimate * a +
                     lmmse_extrapolate(sigma, part, u2, 0.05).estimate * b;
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Lmmse, WeightsSolveTheNormalEquations) {
  const Tensor sigma = correlation_matrix(grid(4, 4, 0.04, 0.08), CorrelationModel::bessel);
  const MaskPartition part = strided(16, 4, 1);
  const double nv = 0.2;
  const LmmseWeights w = lmmse_weights(sigma, part, nv);
  Tensor sbb = sub_matrix(sigma, part.observed, part.observed);
  for (std::size_t i = 0; i < sbb.rows(); ++i) sbb(i, i) += nv;
  const Tensor lhs = reference::matmul(w.weights, sbb);
  EXPECT_LT(max_abs_diff(lhs, sub_matrix(sigma, part.masked, part.observed)), 1e-10);
}

TEST(Lmmse, AnalyticNmseMatchesMonteCarloOnFourByFour) {
  const Tensor sigma = correlation_matrix(grid(4, 4, 0.04, 0.08), CorrelationModel::clarke);
  const ChannelFactors f = factorize(sigma, 1.0);
  const MaskPartition part = MaskPartition::from_observed(16, {0, 5, 10, 15});
  const LmmseWeights w = lmmse_weights(sigma, part, 0.0);
  RngStream rng(12, "mc");
  double err = 0.0, energy = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Tensor g = sample_channel(f, 8, rng);
    const Tensor est = reference::matmul(w.weights, gather_rows(g, part.observed));
    const Tensor truth = gather_rows(g, part.masked);
    for (std::size_t i = 0; i < est.size(); ++i) {
      err += (est[i] - truth[i]) * (est[i] - truth[i]);
      energy += truth[i] * truth[i];
    }
  }
  EXPECT_NEAR(err / energy, analytic_lmmse_nmse(sigma, part, 0.0), 1e-3);
}

TEST(Lmmse, AnalyticNmseIsTraceFormula) {
  const Tensor sigma = correlation_matrix(grid(3, 4, 0.04, 0.08), CorrelationModel::clarke);
  const MaskPartition part = strided(12, 3, 2);
  const double nv = 0.3;
  const LmmseWeights w = lmmse_weights(sigma, part, nv);
  const Tensor saa = sub_matrix(sigma, part.masked, part.masked);
  const Tensor sba = sub_matrix(sigma, part.observed, part.masked);
  const Tensor explained = reference::matmul(w.weights, sba);
  EXPECT_NEAR(analytic_lmmse_nmse(sigma, part, nv), (trace(saa) - trace(explained)) / trace(saa), 1e-12);
}

TEST(Lmmse, MoreObservedPortsNeverHurt) {
  RngStream rng(13, "nested");
  for (std::size_t side : {3u, 5u, 8u}) {
    const std::size_t n = side * side;
    const double w = 0.0857 / 4.0 * static_cast<double>(side - 1);
    const Tensor sigma = correlation_matrix(grid(side, side, w, w), CorrelationModel::clarke);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
      for (double nv : {0.0, 0.01}) {
        double prev = static_cast<double>(n);
        for (std::size_t k = 1; k < n; ++k) {
          const std::vector<std::size_t> obs(order.begin(), order.begin() + static_cast<long>(k));
          const double v = analytic_lmmse_nmse(sigma, MaskPartition::from_observed(n, obs), nv) *
                           static_cast<double>(n - k);
          EXPECT_LE(v, prev + 1e-5) << "side " << side << " k " << k;
          prev = v;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Nearest neighbor

TEST(NearestNeighbor, SingleMaskedPortCopiesAdjacent) {
  const PortGrid g = grid(2, 3, 0.02, 0.08);
  std::vector<std::size_t> obs{0, 1, 2, 3, 5};
  const MaskPartition part = MaskPartition::from_observed(6, obs);
  Tensor u({5, 2});
  for (std::size_t r = 0; r < 5; ++r) u(r, 0) = static_cast<double>(obs[r]);
  const Tensor est = nearest_neighbor_extrapolate(g, part, u);
  // port 4 = (1, 1): port 1 = (0, 1) is 2 cm away, ports 3 and 5 are 4 cm away
  EXPECT_EQ(est(0, 0), 1.0);
}

TEST(NearestNeighbor, OneObservedPortIsCopiedEverywhere) {
  const PortGrid g = grid(3, 3, 0.04, 0.04);
  const MaskPartition part = MaskPartition::from_observed(9, {7});
  const Tensor u = test::random_tensor({1, 4}, 6);
  const Tensor est = nearest_neighbor_extrapolate(g, part, u);
  ASSERT_EQ(est.rows(), 8u);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(est(r, c), u(0, c));
}

TEST(NearestNeighbor, TiesGoToLowerIndex) {
  const PortGrid g = grid(3, 3, 0.04, 0.04);
  const MaskPartition part = MaskPartition::from_observed(9, {7, 5, 3, 1});
  Tensor u({4, 2});
  for (std::size_t r = 0; r < 4; ++r) u(r, 0) = static_cast<double>(part.observed[r]);
  const Tensor est = nearest_neighbor_extrapolate(g, part, u);
  // centre port 4 is equidistant from 1, 3, 5 and 7
  const auto it = std::find(part.masked.begin(), part.masked.end(), 4u);
  EXPECT_EQ(est(static_cast<std::size_t>(it - part.masked.begin()), 0), 1.0);
}

TEST(NearestNeighbor, NeverBeatsLmmseInExpectation) {
  // expected NMSE of any fixed linear map P: tr(Σ_AA − 2PΣ_BA + PΣ_BBPᵀ) / tr(Σ_AA)
  RngStream rng(14, "nn");
  for (auto model : {CorrelationModel::clarke, CorrelationModel::bessel}) {
    const PortGrid g = grid(8, 8, 0.04, 0.08);
    const Tensor sigma = correlation_matrix(g, model);
    for (std::size_t k : {3u, 6u, 16u, 32u}) {
      std::vector<std::size_t> order(64);
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = 63; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
      const MaskPartition part = MaskPartition::from_observed(
          64, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(k)));
      const Tensor p = nearest_neighbor_extrapolate(g, part, Tensor::identity(k));
      const Tensor saa = sub_matrix(sigma, part.masked, part.masked);
      const Tensor sba = sub_matrix(sigma, part.observed, part.masked);
      const Tensor sbb = sub_matrix(sigma, part.observed, part.observed);
      const double nn = (trace(saa) - 2.0 * trace(reference::matmul(p, sba)) +
                         trace(reference::matmul_nt(reference::matmul(p, sbb), p))) /
                        trace(saa);
      EXPECT_GE(nn + 1e-12, analytic_lmmse_nmse(sigma, part, 0.0));
    }
  }
}

}  // namespace
}  // namespace fas
