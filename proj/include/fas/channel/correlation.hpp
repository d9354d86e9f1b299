#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fas/channel/grid.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

enum class CorrelationModel {
  clarke,  // sinc(2d/λ), isotropic 3-D scattering
  bessel,  // J0(2πd/λ), the "fully correlated" model
};

std::string_view to_string(CorrelationModel model);
std::optional<CorrelationModel> parse_correlation_model(std::string_view text);

/// sin(πx)/(πx), with sinc(0) = 1.
double sinc(double x) noexcept;

/// Zero-order Bessel function of the first kind. Power series for |x| <= 8,
/// Hankel asymptotic expansion (optimally truncated) beyond.
double bessel_j0(double x) noexcept;

/// N_S×N_S spatial correlation matrix for the grid's port positions.
Tensor correlation_matrix(const PortGrid& grid, CorrelationModel model);

/// Correlation for an explicit position list; used for line grids in tests.
Tensor correlation_matrix(const std::vector<Position>& positions, double lambda_m,
                          CorrelationModel model);

}  // namespace fas
