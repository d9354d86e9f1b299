#pragma once

#include <cstddef>

#include "fas/channel/grid.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

/// Fixed 2-D sine-cosine table, N_S×d. For port (i, j) the first d/2
/// columns hold sin(i·ω_k), cos(i·ω_k) interleaved and the last d/2 the same
/// for j, with ω_k = 10000^(−2k/d), 0 <= k < d/4. Requires d % 4 == 0.
Tensor positional_encoding_2d(const PortGrid& grid, std::size_t d);

}  // namespace fas
