#include "fas/channel/grid.hpp"

#include <cmath>
#include <string>

#include "fas/error.hpp"

namespace fas {

void PortGrid::validate() const {
  if (nx < 2 || ny < 2) {
    throw Error(ErrorKind::geometry, "port grid needs at least 2 ports per axis, got " +
                                         std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(wx_m > 0.0) || !(wy_m > 0.0) || !(lambda_m > 0.0) || !std::isfinite(wx_m) ||
      !std::isfinite(wy_m) || !std::isfinite(lambda_m)) {
    throw Error(ErrorKind::geometry, "aperture extents and wavelength must be positive");
  }
}

std::vector<Position> port_positions(const PortGrid& grid) {
  grid.validate();
  const double dx = grid.spacing_x();
  const double dy = grid.spacing_y();
  std::vector<Position> out;
  out.reserve(grid.port_count());
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.ny; ++j)
      out.push_back({static_cast<double>(i) * dx, static_cast<double>(j) * dy});
  return out;
}

double distance(const Position& a, const Position& b) noexcept {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace fas
