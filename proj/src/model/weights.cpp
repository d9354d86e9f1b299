#include "fas/model/weights.hpp"

#include <cmath>

#include "fas/error.hpp"
#include "fas/model/positional.hpp"

namespace fas {

Tensor positional_encoding_2d(const PortGrid& grid, std::size_t d) {
  if (d == 0 || d % 4 != 0) {
    throw Error(ErrorKind::config, "positional encoding width must be a multiple of 4");
  }
  const std::size_t n = grid.port_count();
  const std::size_t half = d / 2;
  const std::size_t freqs = d / 4;
  std::vector<double> omega(freqs);
  for (std::size_t k = 0; k < freqs; ++k) {
    omega[k] = std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(d));
  }
  Tensor pe({n, d});
  for (std::size_t p = 0; p < n; ++p) {
    const double i = static_cast<double>(grid.row_of(p));
    const double j = static_cast<double>(grid.col_of(p));
    for (std::size_t k = 0; k < freqs; ++k) {
      pe(p, 2 * k) = std::sin(i * omega[k]);
      pe(p, 2 * k + 1) = std::cos(i * omega[k]);
      pe(p, half + 2 * k) = std::sin(j * omega[k]);
      pe(p, half + 2 * k + 1) = std::cos(j * omega[k]);
    }
  }
  return pe;
}

SSNetWeights::SSNetWeights(const SSNetConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d = config_.d_model;
  const std::size_t dd = config_.d_dec;
  const std::size_t tw = config_.token_width();

  input_proj = add("input_proj", {tw, d}, true);
  for (std::size_t b = 0; b < config_.depth_enc; ++b) {
    const std::string pre = "enc." + std::to_string(b) + ".";
    EncoderBlockIds ids;
    ids.msa1 = add_msa(pre + "msa1", d);
    ids.norm1 = add_norm(pre + "norm1", d);
    if (config_.use_moe) {
      ids.moe.gate_w = add(pre + "moe.gate_w", {d, config_.experts}, true);
      ids.moe.gate_b = add(pre + "moe.gate_b", {1, config_.experts}, false);
      for (std::size_t e = 0; e < config_.experts; ++e) {
        ids.moe.experts.push_back(
            add_mlp(pre + "moe.expert" + std::to_string(e), d, config_.hidden_enc(), false));
      }
    } else {
      ids.stage_ffn = add_mlp(pre + "stage_ffn", d, config_.hidden_enc(), false);
    }
    ids.msa2 = add_msa(pre + "msa2", d);
    ids.norm2 = add_norm(pre + "norm2", d);
    ids.ffn = add_mlp(pre + "ffn", d, config_.hidden_enc(), true);
    ids.norm3 = add_norm(pre + "norm3", d);
    encoder.push_back(std::move(ids));
  }
  decoder_proj = add("decoder_proj", {d, dd}, true);
  mask_token = add("mask_token", {1, dd}, false);
  for (std::size_t b = 0; b < config_.depth_dec; ++b) {
    const std::string pre = "dec." + std::to_string(b) + ".";
    DecoderBlockIds ids;
    ids.msa = add_msa(pre + "msa", dd);
    ids.norm1 = add_norm(pre + "norm1", dd);
    ids.ffn = add_mlp(pre + "ffn", dd, config_.hidden_dec(), true);
    ids.norm2 = add_norm(pre + "norm2", dd);
    decoder.push_back(std::move(ids));
  }
  recon_head = add("recon_head", {dd, tw}, true);

  pe_enc_ = positional_encoding_2d(config_.grid, d);
  pe_dec_ = positional_encoding_2d(config_.grid, dd);
}

SSNetWeights SSNetWeights::initialize(const SSNetConfig& config, std::uint64_t seed) {
  SSNetWeights w(config);
  const RngStream root(seed, "init");
  for (Parameter& p : w.params_) {
    RngStream rng = root.child(p.name);
    const bool is_gain = p.name.ends_with(".gain");
    if (p.name == "mask_token") {
      for (double& v : p.value.values()) v = 0.02 * rng.normal();
    } else if (is_gain) {
      p.value.fill(1.0);
    } else if (p.decay) {
      p.value = xavier_init(p.value.shape(), rng);
    }
    // biases stay zero
  }
  return w;
}

ParamId SSNetWeights::add(std::string name, std::vector<std::size_t> shape, bool decay) {
  params_.emplace_back(std::move(name), Tensor(std::move(shape)), decay);
  return params_.size() - 1;
}

MsaIds SSNetWeights::add_msa(const std::string& prefix, std::size_t d) {
  return {add(prefix + ".wq", {d, d}, true), add(prefix + ".wk", {d, d}, true),
          add(prefix + ".wv", {d, d}, true), add(prefix + ".wo", {d, d}, true)};
}

NormIds SSNetWeights::add_norm(const std::string& prefix, std::size_t d) {
  return {add(prefix + ".gain", {1, d}, false), add(prefix + ".bias", {1, d}, false)};
}

MlpIds SSNetWeights::add_mlp(const std::string& prefix, std::size_t d, std::size_t hidden,
                             bool bias) {
  MlpIds ids;
  ids.w1 = add(prefix + ".w1", {d, hidden}, true);
  if (bias) ids.b1 = add(prefix + ".b1", {1, hidden}, false);
  ids.w2 = add(prefix + ".w2", {hidden, d}, true);
  if (bias) ids.b2 = add(prefix + ".b2", {1, d}, false);
  return ids;
}

ParamId SSNetWeights::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw Error(ErrorKind::config, "unknown parameter '" + std::string(name) + "'");
}

std::size_t SSNetWeights::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

bool SSNetWeights::all_finite() const noexcept {
  for (const Parameter& p : params_)
    if (!p.value.all_finite()) return false;
  return true;
}

GradSet make_grad_set(const SSNetWeights& weights) {
  GradSet g;
  g.reserve(weights.params().size());
  for (const Parameter& p : weights.params()) g.push_back(Tensor::zeros_like(p.value));
  return g;
}

void zero(GradSet& grads) {
  for (Tensor& t : grads) t.fill(0.0);
}

}  // namespace fas
