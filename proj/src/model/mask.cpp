#include "fas/model/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fas/error.hpp"

namespace fas {

std::size_t MaskSpec::observed_count(std::size_t port_count, double mask_ratio) {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(port_count) * (1.0 - mask_ratio)));
}

MaskSpec MaskSpec::from_observed(std::size_t port_count, std::vector<std::size_t> observed) {
  std::sort(observed.begin(), observed.end());
  if (observed.empty()) throw Error(ErrorKind::config, "mask: no observed ports");
  if (std::adjacent_find(observed.begin(), observed.end()) != observed.end()) {
    throw Error(ErrorKind::config, "mask: duplicate observed port");
  }
  if (observed.back() >= port_count) throw Error(ErrorKind::config, "mask: port out of range");
  MaskSpec m;
  m.port_count = port_count;
  m.mask_ratio = 1.0 - static_cast<double>(observed.size()) / static_cast<double>(port_count);
  std::size_t k = 0;
  for (std::size_t p = 0; p < port_count; ++p) {
    if (k < observed.size() && observed[k] == p) {
      ++k;
    } else {
      m.masked.push_back(p);
    }
  }
  m.observed = std::move(observed);
  return m;
}

MaskSpec MaskSpec::all_observed(std::size_t port_count) {
  MaskSpec m;
  m.port_count = port_count;
  m.observed.resize(port_count);
  std::iota(m.observed.begin(), m.observed.end(), std::size_t{0});
  return m;
}

MaskPartition MaskSpec::partition() const {
  return MaskPartition::from_observed(port_count, observed);
}

MaskSpec make_mask(std::size_t port_count, double mask_ratio, RngStream& rng) {
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) {
    throw Error(ErrorKind::config, "mask ratio must lie in (0, 1)");
  }
  const std::size_t n_obs = MaskSpec::observed_count(port_count, mask_ratio);
  if (n_obs < 1) {
    throw Error(ErrorKind::config, "mask ratio " + std::to_string(mask_ratio) +
                                       " leaves no observed port out of " +
                                       std::to_string(port_count));
  }
  if (n_obs >= port_count) {
    throw Error(ErrorKind::config, "mask ratio " + std::to_string(mask_ratio) +
                                       " leaves no masked port");
  }
  std::vector<std::size_t> ports(port_count);
  std::iota(ports.begin(), ports.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_obs; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(port_count - i));
    std::swap(ports[i], ports[j]);
  }
  ports.resize(n_obs);
  MaskSpec m = MaskSpec::from_observed(port_count, std::move(ports));
  m.mask_ratio = mask_ratio;
  return m;
}

}  // namespace fas
