#pragma once

#include <cstdint>
#include <vector>

#include "fas/model/weights.hpp"
#include "fas/numerics/kernels.hpp"
#include "fas/numerics/rng.hpp"

// Building blocks of the network with explicit forward caches and
// hand-derived backward passes. Every *_backward returns the input gradient
// and accumulates parameter gradients into a GradSet.
namespace fas::layers {

/// Per-run switches shared by all layers.
struct RunOptions {
  bool train = false;              // enables dropout
  RngStream* dropout_rng = nullptr;  // required when train && dropout > 0
  /// When set, MoE layers reuse these expert choices (one T·K list per
  /// encoder block) instead of ranking the gate scores. Keeps finite
  /// differences away from top-K switching boundaries.
  const std::vector<std::vector<std::uint32_t>>* fixed_routing = nullptr;
  bool exact_backward = true;  // false injects a LayerNorm backward defect (mutation tests)
};

struct MsaCache {
  Tensor x, q, k, v, concat;
  std::vector<Tensor> attn;  // per head, T×T
};

Tensor msa_forward(const Tensor& x, const SSNetWeights& w, const MsaIds& ids, std::size_t heads,
                   MsaCache* cache);
Tensor msa_backward(const Tensor& dy, const SSNetWeights& w, const MsaIds& ids,
                    std::size_t heads, const MsaCache& cache, GradSet& grads);

struct MlpCache {
  Tensor x, hidden, slope;  // slope = GELU' at the pre-activation
};

Tensor mlp_forward(const Tensor& x, const SSNetWeights& w, const MlpIds& ids, MlpCache* cache);
Tensor mlp_backward(const Tensor& dy, const SSNetWeights& w, const MlpIds& ids,
                    const MlpCache& cache, GradSet& grads);

Tensor norm_forward(const Tensor& x, const SSNetWeights& w, const NormIds& ids, double eps,
                    kernels::LayerNormCache* cache);
Tensor norm_backward(const Tensor& dy, const SSNetWeights& w, const NormIds& ids,
                     const kernels::LayerNormCache& cache, GradSet& grads, bool exact);

struct ExpertBatch {
  std::vector<std::size_t> tokens;  // token row for each routed entry
  std::vector<std::size_t> slots;   // which of the K choices routed it
  MlpCache mlp;
  Tensor out;
};

struct MoeCache {
  Tensor x;
  Tensor probs;                          // T×E gate scores
  std::vector<std::uint32_t> selected;   // T×K expert ids
  std::vector<double> mix;               // T×K aggregation weights
  std::vector<ExpertBatch> experts;
  Tensor drop_mask;                      // T×d keep/(1-p) factors; empty when off
};

/// Top-K gated mixture of experts with optional dropout and residual.
Tensor moe_forward(const Tensor& x, const SSNetWeights& w, const MoeIds& ids,
                   const RunOptions& options, std::size_t block, MoeCache* cache);
Tensor moe_backward(const Tensor& dy, const SSNetWeights& w, const MoeIds& ids,
                    const MoeCache& cache, GradSet& grads);

/// The no-MoE ablation stage: one expert-shaped FFN with dropout (and the
/// residual when moe_residual is set).
struct StageFfnCache {
  MlpCache mlp;
  Tensor drop_mask;
};

struct EncoderBlockCache {
  MsaCache msa1, msa2;
  kernels::LayerNormCache norm1, norm2, norm3;
  MoeCache moe;
  StageFfnCache stage;
  MlpCache ffn;
};

Tensor encoder_block_forward(const Tensor& x, const SSNetWeights& w, std::size_t block,
                             const RunOptions& options, EncoderBlockCache* cache);
Tensor encoder_block_backward(const Tensor& dy, const SSNetWeights& w, std::size_t block,
                              const RunOptions& options, const EncoderBlockCache& cache,
                              GradSet& grads);

struct DecoderBlockCache {
  MsaCache msa;
  kernels::LayerNormCache norm1, norm2;
  MlpCache ffn;
};

Tensor decoder_block_forward(const Tensor& x, const SSNetWeights& w, std::size_t block,
                             DecoderBlockCache* cache);
Tensor decoder_block_backward(const Tensor& dy, const SSNetWeights& w, std::size_t block,
                              const RunOptions& options, const DecoderBlockCache& cache,
                              GradSet& grads);

}  // namespace fas::layers
