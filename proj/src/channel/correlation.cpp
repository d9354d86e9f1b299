#include "fas/channel/correlation.hpp"

#include <cmath>
#include <numbers>

namespace fas {

std::string_view to_string(CorrelationModel model) {
  return model == CorrelationModel::clarke ? "clarke" : "bessel";
}

std::optional<CorrelationModel> parse_correlation_model(std::string_view text) {
  if (text == "clarke") return CorrelationModel::clarke;
  if (text == "bessel") return CorrelationModel::bessel;
  return std::nullopt;
}

double sinc(double x) noexcept {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double bessel_j0(double x) noexcept {
  x = std::abs(x);
  if (x <= 8.0) {
    // sum_k (-1)^k (x²/4)^k / (k!)²
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -q / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
  }
  // J0(x) ~ sqrt(2/(πx)) (P cos χ - Q sin χ), χ = x - π/4, with
  // a_k = prod_{m=1..k} -(2m-1)² / (k! 8^k), P = Σ_even a_k (-1)^{k/2} / x^k,
  // Q = Σ_odd a_k (-1)^{(k-1)/2} / x^k. Stop at the smallest term.
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;  // |a_k| / x^k
  double prev = HUGE_VAL;
  for (int k = 1; k < 64; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= odd * odd / (8.0 * k * x);
    if (a >= prev) break;
    prev = a;
    // sign pattern: k=1:Q -, k=2:P -, k=3:Q +, k=4:P +, ...
    const double sign = ((k + 1) / 2) % 2 == 1 ? -1.0 : 1.0;
    if (k % 2 == 1) {
      q += sign * a;
    } else {
      p += sign * a;
    }
  }
  const double chi = x - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

Tensor correlation_matrix(const std::vector<Position>& positions, double lambda_m,
                          CorrelationModel model) {
  const std::size_t n = positions.size();
  Tensor sigma({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    sigma(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(positions[i], positions[j]) / lambda_m;
      const double v = model == CorrelationModel::clarke
                           ? sinc(2.0 * d)
                           : bessel_j0(2.0 * std::numbers::pi * d);
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  return sigma;
}

Tensor correlation_matrix(const PortGrid& grid, CorrelationModel model) {
  return correlation_matrix(port_positions(grid), grid.lambda_m, model);
}

}  // namespace fas
