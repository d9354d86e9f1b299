#pragma once

#include <cstddef>

#include "fas/channel/grid.hpp"
#include "fas/kv_text.hpp"

namespace fas {

/// Architecture of the masked-autoencoder extrapolator.
///
/// Defaults are the desk-scale stack; the grid and antenna count tie a
/// config to one port layout.
struct SSNetConfig {
  PortGrid grid;
  std::size_t m_antennas = 8;

  std::size_t d_model = 64;    // encoder width
  std::size_t d_dec = 32;      // decoder width
  std::size_t depth_enc = 4;
  std::size_t depth_dec = 2;
  std::size_t heads = 4;       // shared by encoder and decoder attention
  std::size_t experts = 4;     // E
  std::size_t active_experts = 2;  // K
  double dropout = 0.1;
  double norm_eps = 1e-5;
  bool moe_residual = false;      // add x around the MoE stage
  bool renormalize_topk = false;  // renormalize the K selected gate scores
  bool use_moe = true;            // false: MoE stage replaced by one FFN of the same shape

  std::size_t token_width() const noexcept { return 2 * m_antennas; }
  std::size_t hidden_enc() const noexcept { return 4 * d_model; }
  std::size_t hidden_dec() const noexcept { return 4 * d_dec; }

  /// Throws ErrorKind::config when the invariants do not hold: widths
  /// divisible by 4 and by heads, 1 <= K <= E, 0 <= dropout < 1, d_dec <= d_model.
  void validate() const;

  /// Flat key=value form used in checkpoint headers (grid keys included).
  kv::Entries to_entries() const;
  /// Inverse of to_entries; missing keys keep their defaults, unknown keys
  /// throw ErrorKind::config. The result is validated.
  static SSNetConfig from_entries(const kv::Entries& entries);

  friend bool operator==(const SSNetConfig&, const SSNetConfig&) = default;
};

}  // namespace fas
