#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fas {

/// Planar fluid-antenna port grid. Ports are numbered p = i·ny + j, with i the
/// x-axis index and j the y-axis index.
struct PortGrid {
  std::size_t nx = 16;
  std::size_t ny = 32;
  double wx_m = 0.02;
  double wy_m = 0.04;
  double lambda_m = 0.0857;

  /// Throws ErrorKind::geometry unless nx, ny >= 2 and extents are positive.
  void validate() const;

  std::size_t port_count() const noexcept { return nx * ny; }
  double spacing_x() const noexcept { return wx_m / static_cast<double>(nx - 1); }
  double spacing_y() const noexcept { return wy_m / static_cast<double>(ny - 1); }

  std::size_t port_index(std::size_t i, std::size_t j) const noexcept { return i * ny + j; }
  std::size_t row_of(std::size_t port) const noexcept { return port / ny; }
  std::size_t col_of(std::size_t port) const noexcept { return port % ny; }

  friend bool operator==(const PortGrid&, const PortGrid&) = default;
};

using Position = std::array<double, 2>;

/// Physical (x, y) position in meters of every port, in port-index order.
std::vector<Position> port_positions(const PortGrid& grid);

double distance(const Position& a, const Position& b) noexcept;

}  // namespace fas
