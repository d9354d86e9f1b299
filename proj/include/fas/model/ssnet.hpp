#pragma once

#include <cstdint>
#include <vector>

#include "fas/model/layers.hpp"
#include "fas/model/mask.hpp"
#include "fas/model/weights.hpp"
#include "fas/numerics/gradcheck.hpp"

namespace fas {

using layers::RunOptions;

/// Everything backward() needs from one forward pass.
struct ForwardTrace {
  std::vector<std::size_t> observed;
  Tensor u_b;  // N_obs×2M gathered input
  std::vector<layers::EncoderBlockCache> encoder;
  Tensor x_enc;
  std::vector<layers::DecoderBlockCache> decoder;
  Tensor head_in;  // N_S×d_dec, input of the reconstruction head
};

/// x'_p = u_b·W_p + PE[observed]. Row r of u_b belongs to port observed[r].
Tensor embed(const Tensor& u_b, const std::vector<std::size_t>& observed,
             const SSNetWeights& weights);

/// embed followed by depth_enc encoder blocks.
Tensor encode(const Tensor& u_b, const std::vector<std::size_t>& observed,
              const SSNetWeights& weights, const RunOptions& options,
              ForwardTrace* trace = nullptr);

/// Scatters x_enc·W_d to the observed ports, fills the rest with the mask
/// token, adds the decoder PE, runs the decoder blocks and the head.
/// Returns N_S×2M.
Tensor decode(const Tensor& x_enc, const std::vector<std::size_t>& observed,
              const SSNetWeights& weights, const RunOptions& options,
              ForwardTrace* trace = nullptr);

/// Full pipeline on a full-grid input; only rows at mask.observed are read.
Tensor forward(const Tensor& input, const MaskSpec& mask, const SSNetWeights& weights,
               const RunOptions& options = {}, ForwardTrace* trace = nullptr);

/// Accumulates parameter gradients of a scalar loss with d loss/d output = d_out.
void backward(const ForwardTrace& trace, const Tensor& d_out, const SSNetWeights& weights,
              const RunOptions& options, GradSet& grads);

/// Squared error over the masked ports divided by the clean energy there.
/// When d_pred is given it receives d loss/d pred·scale (zero on observed rows).
/// Throws ErrorKind::metric when the masked set is empty or has zero energy.
double masked_loss(const Tensor& pred, const Tensor& truth, const MaskSpec& mask,
                   Tensor* d_pred = nullptr, double scale = 1.0);

/// Expert choices per encoder block (T·K ids each), for RunOptions::fixed_routing.
std::vector<std::vector<std::uint32_t>> routing_of(const ForwardTrace& trace);

/// Tokens routed to each expert, summed over blocks: counts[block][expert].
std::vector<std::vector<std::size_t>> expert_counts(const ForwardTrace& trace,
                                                    const SSNetConfig& config);

/// Finite-difference check of masked_loss(forward(sample)) against backward()
/// over every parameter of `weights`. Dropout is off and the MoE routing is
/// frozen at the unperturbed forward pass. exact_backward=false runs the
/// deliberately broken LayerNorm backward.
GradCheckReport check_gradients(SSNetWeights& weights, const Tensor& sample, const MaskSpec& mask,
                                const GradCheckOptions& options, bool exact_backward = true);

}  // namespace fas
