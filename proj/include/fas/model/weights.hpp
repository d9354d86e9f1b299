#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fas/model/config.hpp"
#include "fas/numerics/optim.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

using ParamId = std::size_t;

// Index bundles into SSNetWeights::params(). Attention heads are column
// blocks of the d×d query/key/value matrices.
struct MsaIds {
  ParamId wq, wk, wv, wo;
};
struct NormIds {
  ParamId gain, bias;
};
/// gelu(x·W1 + b1)·W2 + b2; the bias ids are absent (npos) for experts.
struct MlpIds {
  static constexpr ParamId npos = static_cast<ParamId>(-1);
  ParamId w1, b1 = npos, w2, b2 = npos;
};
struct MoeIds {
  ParamId gate_w, gate_b;
  std::vector<MlpIds> experts;
};
struct EncoderBlockIds {
  MsaIds msa1;
  NormIds norm1;
  MoeIds moe;        // when config.use_moe
  MlpIds stage_ffn;  // otherwise
  MsaIds msa2;
  NormIds norm2;
  MlpIds ffn;
  NormIds norm3;
};
struct DecoderBlockIds {
  MsaIds msa;
  NormIds norm1;
  MlpIds ffn;
  NormIds norm2;
};

/// Every learnable tensor of the network plus the fixed positional tables.
class SSNetWeights {
 public:
  /// Zero-valued layout for the config (gains zero too); see initialize().
  explicit SSNetWeights(const SSNetConfig& config);

  /// Xavier-uniform matrices, unit norm gains, zero biases, N(0, 0.02²)
  /// mask token. Each tensor draws from its own stream (seed, "init").child(name).
  static SSNetWeights initialize(const SSNetConfig& config, std::uint64_t seed);

  const SSNetConfig& config() const noexcept { return config_; }
  std::vector<Parameter>& params() noexcept { return params_; }
  const std::vector<Parameter>& params() const noexcept { return params_; }
  const Tensor& operator[](ParamId id) const noexcept { return params_[id].value; }
  Tensor& value(ParamId id) noexcept { return params_[id].value; }

  /// Throws ErrorKind::config when the name is unknown.
  ParamId find(std::string_view name) const;
  std::size_t scalar_count() const noexcept;

  ParamId input_proj;  // W_p, 2M×d_model
  std::vector<EncoderBlockIds> encoder;
  ParamId decoder_proj;  // W_d, d_model×d_dec
  ParamId mask_token;    // 1×d_dec
  std::vector<DecoderBlockIds> decoder;
  ParamId recon_head;  // W_r, d_dec×2M

  const Tensor& encoder_pe() const noexcept { return pe_enc_; }
  const Tensor& decoder_pe() const noexcept { return pe_dec_; }

  bool all_finite() const noexcept;

 private:
  ParamId add(std::string name, std::vector<std::size_t> shape, bool decay);
  MsaIds add_msa(const std::string& prefix, std::size_t d);
  NormIds add_norm(const std::string& prefix, std::size_t d);
  MlpIds add_mlp(const std::string& prefix, std::size_t d, std::size_t hidden, bool bias);

  SSNetConfig config_;
  std::vector<Parameter> params_;
  Tensor pe_enc_;
  Tensor pe_dec_;
};

/// Gradient buffers aligned with SSNetWeights::params().
using GradSet = std::vector<Tensor>;
GradSet make_grad_set(const SSNetWeights& weights);
void zero(GradSet& grads);

}  // namespace fas
