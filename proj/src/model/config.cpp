#include "fas/model/config.hpp"

#include <string>

#include "fas/error.hpp"

namespace fas {

void SSNetConfig::validate() const {
  grid.validate();
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, "model config: " + msg); };
  if (m_antennas < 1) fail("m_antennas must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (d_model == 0 || d_model % 4 != 0) fail("d_model must be a positive multiple of 4");
  if (d_dec == 0 || d_dec % 4 != 0) fail("d_dec must be a positive multiple of 4");
  if (d_model % heads != 0) fail("d_model must be divisible by heads");
  if (d_dec % heads != 0) fail("d_dec must be divisible by heads");
  if (d_dec > d_model) fail("d_dec must not exceed d_model");
  if (experts < 1 || active_experts < 1 || active_experts > experts) {
    fail("need 1 <= active_experts <= experts");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (!(norm_eps >= 0.0)) fail("norm_eps must be >= 0");
}

kv::Entries SSNetConfig::to_entries() const {
  auto u = [](std::size_t v) { return std::to_string(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"nx", u(grid.nx)},
      {"ny", u(grid.ny)},
      {"wx_m", kv::format_double(grid.wx_m)},
      {"wy_m", kv::format_double(grid.wy_m)},
      {"lambda_m", kv::format_double(grid.lambda_m)},
      {"m_antennas", u(m_antennas)},
      {"d_model", u(d_model)},
      {"d_dec", u(d_dec)},
      {"depth_enc", u(depth_enc)},
      {"depth_dec", u(depth_dec)},
      {"heads", u(heads)},
      {"experts", u(experts)},
      {"active_experts", u(active_experts)},
      {"dropout", kv::format_double(dropout)},
      {"norm_eps", kv::format_double(norm_eps)},
      {"moe_residual", b(moe_residual)},
      {"renormalize_topk", b(renormalize_topk)},
      {"use_moe", b(use_moe)},
  };
}

SSNetConfig SSNetConfig::from_entries(const kv::Entries& entries) {
  SSNetConfig c;
  for (const auto& [key, value] : entries) {
    auto count = [&] {
      const long long v = kv::parse_int(value, key);
      if (v < 0) throw Error(ErrorKind::config, "'" + key + "' must be non-negative");
      return static_cast<std::size_t>(v);
    };
    if (key == "nx") c.grid.nx = count();
    else if (key == "ny") c.grid.ny = count();
    else if (key == "wx_m") c.grid.wx_m = kv::parse_double(value, key);
    else if (key == "wy_m") c.grid.wy_m = kv::parse_double(value, key);
    else if (key == "lambda_m") c.grid.lambda_m = kv::parse_double(value, key);
    else if (key == "m_antennas") c.m_antennas = count();
    else if (key == "d_model") c.d_model = count();
    else if (key == "d_dec") c.d_dec = count();
    else if (key == "depth_enc") c.depth_enc = count();
    else if (key == "depth_dec") c.depth_dec = count();
    else if (key == "heads") c.heads = count();
    else if (key == "experts") c.experts = count();
    else if (key == "active_experts") c.active_experts = count();
    else if (key == "dropout") c.dropout = kv::parse_double(value, key);
    else if (key == "norm_eps") c.norm_eps = kv::parse_double(value, key);
    else if (key == "moe_residual") c.moe_residual = kv::parse_bool(value, key);
    else if (key == "renormalize_topk") c.renormalize_topk = kv::parse_bool(value, key);
    else if (key == "use_moe") c.use_moe = kv::parse_bool(value, key);
    else throw Error(ErrorKind::config, "unknown model key '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace fas
