#include "fas/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "numerics/eigen_view.hpp"
#include "fas/error.hpp"

namespace fas::layers {
namespace {

using kernels::matmul;
using kernels::matmul_nt;
using kernels::matmul_tn_acc;

Tensor make_drop_mask(std::size_t rows, std::size_t cols, double p, RngStream& rng) {
  Tensor m({rows, cols});
  const double keep = 1.0 / (1.0 - p);
  for (double& v : m.values()) v = rng.uniform() < p ? 0.0 : keep;
  return m;
}

void hadamard_inplace(Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
}

bool dropout_active(const RunOptions& options, double p) { return options.train && p > 0.0; }

RngStream& require_dropout_rng(const RunOptions& options) {
  if (!options.dropout_rng) {
    throw Error(ErrorKind::config, "training-mode forward needs a dropout stream");
  }
  return *options.dropout_rng;
}

}  // namespace

// ---------------------------------------------------------------------------
// Multi-head self-attention

Tensor msa_forward(const Tensor& x, const SSNetWeights& w, const MsaIds& ids, std::size_t heads,
                   MsaCache* cache) {
  const std::size_t t = x.rows();
  const std::size_t d = x.cols();
  const std::size_t dk = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Tensor q = matmul(x, w[ids.wq]);
  Tensor k = matmul(x, w[ids.wk]);
  Tensor v = matmul(x, w[ids.wv]);
  Tensor concat({t, d});
  std::vector<Tensor> attn;
  attn.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dk;
    Tensor scores({t, t});
    detail::view(scores).noalias() =
        scale * detail::columns(q, off, dk) * detail::columns(k, off, dk).transpose();
    Tensor p = kernels::softmax_rows(scores);
    detail::columns(concat, off, dk).noalias() = detail::view(p) * detail::columns(v, off, dk);
    attn.push_back(std::move(p));
  }
  Tensor y = matmul(concat, w[ids.wo]);
  if (cache) {
    cache->x = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->concat = std::move(concat);
    cache->attn = std::move(attn);
  }
  return y;
}

Tensor msa_backward(const Tensor& dy, const SSNetWeights& w, const MsaIds& ids,
                    std::size_t heads, const MsaCache& c, GradSet& grads) {
  const std::size_t t = c.x.rows();
  const std::size_t d = c.x.cols();
  const std::size_t dk = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  matmul_tn_acc(c.concat, dy, grads[ids.wo]);
  const Tensor dconcat = matmul_nt(dy, w[ids.wo]);
  Tensor dq({t, d});
  Tensor dk_({t, d});
  Tensor dv({t, d});
  Tensor dp({t, t});
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dk;
    const Tensor& p = c.attn[h];
    const auto g = detail::columns(dconcat, off, dk);
    detail::view(dp).noalias() = g * detail::columns(c.v, off, dk).transpose();
    detail::columns(dv, off, dk).noalias() = detail::view(p).transpose() * g;
    Tensor ds = kernels::softmax_rows_backward(p, dp);
    ds *= scale;
    detail::columns(dq, off, dk).noalias() = detail::view(ds) * detail::columns(c.k, off, dk);
    detail::columns(dk_, off, dk).noalias() =
        detail::view(ds).transpose() * detail::columns(c.q, off, dk);
  }
  matmul_tn_acc(c.x, dq, grads[ids.wq]);
  matmul_tn_acc(c.x, dk_, grads[ids.wk]);
  matmul_tn_acc(c.x, dv, grads[ids.wv]);
  Tensor dx = matmul_nt(dq, w[ids.wq]);
  dx += matmul_nt(dk_, w[ids.wk]);
  dx += matmul_nt(dv, w[ids.wv]);
  return dx;
}

// ---------------------------------------------------------------------------
// Two-layer GELU perceptron

Tensor mlp_forward(const Tensor& x, const SSNetWeights& w, const MlpIds& ids, MlpCache* cache) {
  Tensor pre = matmul(x, w[ids.w1]);
  if (ids.b1 != MlpIds::npos) kernels::add_row_bias(pre, w[ids.b1]);
  Tensor slope;
  Tensor hidden = kernels::gelu(pre, cache ? &slope : nullptr);
  Tensor y = matmul(hidden, w[ids.w2]);
  if (ids.b2 != MlpIds::npos) kernels::add_row_bias(y, w[ids.b2]);
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(hidden);
    cache->slope = std::move(slope);
  }
  return y;
}

Tensor mlp_backward(const Tensor& dy, const SSNetWeights& w, const MlpIds& ids,
                    const MlpCache& c, GradSet& grads) {
  matmul_tn_acc(c.hidden, dy, grads[ids.w2]);
  if (ids.b2 != MlpIds::npos) kernels::colsum_acc(dy, grads[ids.b2]);
  Tensor dpre = matmul_nt(dy, w[ids.w2]);
  for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= c.slope[i];
  matmul_tn_acc(c.x, dpre, grads[ids.w1]);
  if (ids.b1 != MlpIds::npos) kernels::colsum_acc(dpre, grads[ids.b1]);
  return matmul_nt(dpre, w[ids.w1]);
}

// ---------------------------------------------------------------------------
// LayerNorm with learned affine

Tensor norm_forward(const Tensor& x, const SSNetWeights& w, const NormIds& ids, double eps,
                    kernels::LayerNormCache* cache) {
  return kernels::layer_norm(x, w[ids.gain], w[ids.bias], eps, cache);
}

Tensor norm_backward(const Tensor& dy, const SSNetWeights& w, const NormIds& ids,
                     const kernels::LayerNormCache& cache, GradSet& grads, bool exact) {
  return kernels::layer_norm_backward(dy, w[ids.gain], cache, grads[ids.gain], grads[ids.bias],
                                      exact);
}

// ---------------------------------------------------------------------------
// Mixture of experts

Tensor moe_forward(const Tensor& x, const SSNetWeights& w, const MoeIds& ids,
                   const RunOptions& options, std::size_t block, MoeCache* cache) {
  const SSNetConfig& cfg = w.config();
  const std::size_t t = x.rows();
  const std::size_t d = x.cols();
  const std::size_t n_exp = ids.experts.size();
  const std::size_t top = cfg.active_experts;

  Tensor logits = matmul(x, w[ids.gate_w]);
  kernels::add_row_bias(logits, w[ids.gate_b]);
  Tensor probs = kernels::softmax_rows(logits);

  std::vector<std::uint32_t> selected(t * top);
  std::vector<double> mix(t * top);
  std::vector<std::uint32_t> order(n_exp);
  for (std::size_t i = 0; i < t; ++i) {
    if (options.fixed_routing) {
      const auto& fixed = (*options.fixed_routing).at(block);
      if (fixed.size() != t * top) {
        throw Error(ErrorKind::dimension, "fixed routing does not match token count");
      }
      std::copy_n(fixed.begin() + static_cast<std::ptrdiff_t>(i * top), top,
                  selected.begin() + static_cast<std::ptrdiff_t>(i * top));
    } else {
      std::iota(order.begin(), order.end(), 0u);
      // highest score first; equal scores keep the lower expert index
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return probs(i, a) > probs(i, b); });
      std::copy_n(order.begin(), top, selected.begin() + static_cast<std::ptrdiff_t>(i * top));
    }
    double z = 0.0;
    for (std::size_t s = 0; s < top; ++s) z += probs(i, selected[i * top + s]);
    for (std::size_t s = 0; s < top; ++s) {
      const double pi = probs(i, selected[i * top + s]);
      mix[i * top + s] = cfg.renormalize_topk ? pi / z : pi;
    }
  }

  std::vector<ExpertBatch> batches(n_exp);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t s = 0; s < top; ++s) {
      ExpertBatch& b = batches[selected[i * top + s]];
      b.tokens.push_back(i);
      b.slots.push_back(s);
    }

  Tensor agg({t, d});
  for (std::size_t e = 0; e < n_exp; ++e) {
    ExpertBatch& b = batches[e];
    if (b.tokens.empty()) continue;
    Tensor xin({b.tokens.size(), d});
    for (std::size_t r = 0; r < b.tokens.size(); ++r) {
      const auto src = x.row(b.tokens[r]);
      std::copy(src.begin(), src.end(), xin.row(r).begin());
    }
    b.out = mlp_forward(xin, w, ids.experts[e], &b.mlp);
    for (std::size_t r = 0; r < b.tokens.size(); ++r) {
      const double m = mix[b.tokens[r] * top + b.slots[r]];
      auto dst = agg.row(b.tokens[r]);
      const auto src = b.out.row(r);
      for (std::size_t c = 0; c < d; ++c) dst[c] += m * src[c];
    }
  }

  Tensor drop_mask;
  if (dropout_active(options, cfg.dropout)) {
    drop_mask = make_drop_mask(t, d, cfg.dropout, require_dropout_rng(options));
    hadamard_inplace(agg, drop_mask);
  }
  if (cfg.moe_residual) agg += x;

  if (cache) {
    cache->x = x;
    cache->probs = std::move(probs);
    cache->selected = std::move(selected);
    cache->mix = std::move(mix);
    cache->experts = std::move(batches);
    cache->drop_mask = std::move(drop_mask);
  }
  return agg;
}

Tensor moe_backward(const Tensor& dy, const SSNetWeights& w, const MoeIds& ids,
                    const MoeCache& c, GradSet& grads) {
  const SSNetConfig& cfg = w.config();
  const std::size_t t = c.x.rows();
  const std::size_t d = c.x.cols();
  const std::size_t top = cfg.active_experts;

  Tensor dagg = dy;
  if (!c.drop_mask.empty()) hadamard_inplace(dagg, c.drop_mask);
  Tensor dx = cfg.moe_residual ? dy : Tensor({t, d});

  std::vector<double> dmix(t * top, 0.0);
  for (std::size_t e = 0; e < c.experts.size(); ++e) {
    const ExpertBatch& b = c.experts[e];
    if (b.tokens.empty()) continue;
    Tensor dout({b.tokens.size(), d});
    for (std::size_t r = 0; r < b.tokens.size(); ++r) {
      const std::size_t tok = b.tokens[r];
      const double m = c.mix[tok * top + b.slots[r]];
      const auto g = dagg.row(tok);
      const auto o = b.out.row(r);
      auto dst = dout.row(r);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        dst[k] = m * g[k];
        dot += g[k] * o[k];
      }
      dmix[tok * top + b.slots[r]] = dot;
    }
    const Tensor dxin = mlp_backward(dout, w, ids.experts[e], b.mlp, grads);
    for (std::size_t r = 0; r < b.tokens.size(); ++r) {
      auto dst = dx.row(b.tokens[r]);
      const auto src = dxin.row(r);
      for (std::size_t k = 0; k < d; ++k) dst[k] += src[k];
    }
  }

  Tensor dprobs(c.probs.shape());
  for (std::size_t i = 0; i < t; ++i) {
    if (cfg.renormalize_topk) {
      double z = 0.0;
      double weighted = 0.0;
      for (std::size_t s = 0; s < top; ++s) {
        const double pi = c.probs(i, c.selected[i * top + s]);
        z += pi;
        weighted += dmix[i * top + s] * pi;
      }
      for (std::size_t s = 0; s < top; ++s) {
        dprobs(i, c.selected[i * top + s]) += dmix[i * top + s] / z - weighted / (z * z);
      }
    } else {
      for (std::size_t s = 0; s < top; ++s) dprobs(i, c.selected[i * top + s]) += dmix[i * top + s];
    }
  }
  const Tensor dlogits = kernels::softmax_rows_backward(c.probs, dprobs);
  matmul_tn_acc(c.x, dlogits, grads[ids.gate_w]);
  kernels::colsum_acc(dlogits, grads[ids.gate_b]);
  dx += matmul_nt(dlogits, w[ids.gate_w]);
  return dx;
}

// ---------------------------------------------------------------------------
// Encoder block: LN(x + MSA(x)) → MoE → LN(· + MSA(·)) → LN(· + FFN(·))

namespace {

Tensor stage_ffn_forward(const Tensor& x, const SSNetWeights& w, const MlpIds& ids,
                         const RunOptions& options, StageFfnCache* cache) {
  const SSNetConfig& cfg = w.config();
  Tensor y = mlp_forward(x, w, ids, cache ? &cache->mlp : nullptr);
  Tensor mask;
  if (dropout_active(options, cfg.dropout)) {
    mask = make_drop_mask(y.rows(), y.cols(), cfg.dropout, require_dropout_rng(options));
    hadamard_inplace(y, mask);
  }
  if (cfg.moe_residual) y += x;
  if (cache) cache->drop_mask = std::move(mask);
  return y;
}

Tensor stage_ffn_backward(const Tensor& dy, const SSNetWeights& w, const MlpIds& ids,
                          const StageFfnCache& c, GradSet& grads) {
  Tensor g = dy;
  if (!c.drop_mask.empty()) hadamard_inplace(g, c.drop_mask);
  Tensor dx = mlp_backward(g, w, ids, c.mlp, grads);
  if (w.config().moe_residual) dx += dy;
  return dx;
}

}  // namespace

Tensor encoder_block_forward(const Tensor& x, const SSNetWeights& w, std::size_t block,
                             const RunOptions& options, EncoderBlockCache* cache) {
  const SSNetConfig& cfg = w.config();
  const EncoderBlockIds& ids = w.encoder.at(block);
  const std::size_t h = cfg.heads;

  Tensor r1 = x + msa_forward(x, w, ids.msa1, h, cache ? &cache->msa1 : nullptr);
  Tensor x1 = norm_forward(r1, w, ids.norm1, cfg.norm_eps, cache ? &cache->norm1 : nullptr);
  Tensor x2 = cfg.use_moe
                  ? moe_forward(x1, w, ids.moe, options, block, cache ? &cache->moe : nullptr)
                  : stage_ffn_forward(x1, w, ids.stage_ffn, options,
                                      cache ? &cache->stage : nullptr);
  Tensor r2 = x2 + msa_forward(x2, w, ids.msa2, h, cache ? &cache->msa2 : nullptr);
  Tensor x3 = norm_forward(r2, w, ids.norm2, cfg.norm_eps, cache ? &cache->norm2 : nullptr);
  Tensor r3 = x3 + mlp_forward(x3, w, ids.ffn, cache ? &cache->ffn : nullptr);
  return norm_forward(r3, w, ids.norm3, cfg.norm_eps, cache ? &cache->norm3 : nullptr);
}

Tensor encoder_block_backward(const Tensor& dy, const SSNetWeights& w, std::size_t block,
                              const RunOptions& options, const EncoderBlockCache& c,
                              GradSet& grads) {
  const SSNetConfig& cfg = w.config();
  const EncoderBlockIds& ids = w.encoder.at(block);
  const std::size_t h = cfg.heads;
  const bool exact = options.exact_backward;

  const Tensor dr3 = norm_backward(dy, w, ids.norm3, c.norm3, grads, exact);
  Tensor dx3 = dr3 + mlp_backward(dr3, w, ids.ffn, c.ffn, grads);
  const Tensor dr2 = norm_backward(dx3, w, ids.norm2, c.norm2, grads, exact);
  Tensor dx2 = dr2 + msa_backward(dr2, w, ids.msa2, h, c.msa2, grads);
  const Tensor dx1 = cfg.use_moe ? moe_backward(dx2, w, ids.moe, c.moe, grads)
                                 : stage_ffn_backward(dx2, w, ids.stage_ffn, c.stage, grads);
  const Tensor dr1 = norm_backward(dx1, w, ids.norm1, c.norm1, grads, exact);
  return dr1 + msa_backward(dr1, w, ids.msa1, h, c.msa1, grads);
}

// ---------------------------------------------------------------------------
// Decoder block: LN(z + MSA(z)) → LN(· + FFN(·))

Tensor decoder_block_forward(const Tensor& x, const SSNetWeights& w, std::size_t block,
                             DecoderBlockCache* cache) {
  const SSNetConfig& cfg = w.config();
  const DecoderBlockIds& ids = w.decoder.at(block);
  Tensor r1 = x + msa_forward(x, w, ids.msa, cfg.heads, cache ? &cache->msa : nullptr);
  Tensor z1 = norm_forward(r1, w, ids.norm1, cfg.norm_eps, cache ? &cache->norm1 : nullptr);
  Tensor r2 = z1 + mlp_forward(z1, w, ids.ffn, cache ? &cache->ffn : nullptr);
  return norm_forward(r2, w, ids.norm2, cfg.norm_eps, cache ? &cache->norm2 : nullptr);
}

Tensor decoder_block_backward(const Tensor& dy, const SSNetWeights& w, std::size_t block,
                              const RunOptions& options, const DecoderBlockCache& c,
                              GradSet& grads) {
  const DecoderBlockIds& ids = w.decoder.at(block);
  const bool exact = options.exact_backward;
  const Tensor dr2 = norm_backward(dy, w, ids.norm2, c.norm2, grads, exact);
  Tensor dz1 = dr2 + mlp_backward(dr2, w, ids.ffn, c.ffn, grads);
  const Tensor dr1 = norm_backward(dz1, w, ids.norm1, c.norm1, grads, exact);
  return dr1 + msa_backward(dr1, w, ids.msa, w.config().heads, c.msa, grads);
}

}  // namespace fas::layers
