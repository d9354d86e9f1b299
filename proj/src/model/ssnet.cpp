#include "fas/model/ssnet.hpp"

#include <algorithm>
#include <string>

#include "fas/error.hpp"

namespace fas {
namespace {

void check_observed(const std::vector<std::size_t>& observed, std::size_t rows,
                    std::size_t port_count) {
  if (observed.empty() || observed.size() != rows) {
    throw Error(ErrorKind::dimension, "observed list has " + std::to_string(observed.size()) +
                                          " ports for " + std::to_string(rows) + " rows");
  }
  for (std::size_t p : observed)
    if (p >= port_count) throw Error(ErrorKind::dimension, "observed port out of range");
}

}  // namespace

Tensor embed(const Tensor& u_b, const std::vector<std::size_t>& observed,
             const SSNetWeights& weights) {
  const SSNetConfig& cfg = weights.config();
  if (u_b.rank() != 2 || u_b.cols() != cfg.token_width()) {
    throw Error(ErrorKind::dimension, "embed: expected N_obs×" +
                                          std::to_string(cfg.token_width()) + " input, got " +
                                          shape_string(u_b.shape()));
  }
  check_observed(observed, u_b.rows(), cfg.grid.port_count());
  Tensor x = kernels::matmul(u_b, weights[weights.input_proj]);
  const Tensor& pe = weights.encoder_pe();
  for (std::size_t r = 0; r < observed.size(); ++r) {
    auto dst = x.row(r);
    const auto src = pe.row(observed[r]);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
  return x;
}

Tensor encode(const Tensor& u_b, const std::vector<std::size_t>& observed,
              const SSNetWeights& weights, const RunOptions& options, ForwardTrace* trace) {
  Tensor x = embed(u_b, observed, weights);
  const std::size_t depth = weights.config().depth_enc;
  if (trace) {
    trace->observed = observed;
    trace->u_b = u_b;
    trace->encoder.assign(depth, {});
  }
  for (std::size_t b = 0; b < depth; ++b) {
    x = layers::encoder_block_forward(x, weights, b, options,
                                      trace ? &trace->encoder[b] : nullptr);
  }
  if (trace) trace->x_enc = x;
  return x;
}

Tensor decode(const Tensor& x_enc, const std::vector<std::size_t>& observed,
              const SSNetWeights& weights, const RunOptions& /*options*/, ForwardTrace* trace) {
  const SSNetConfig& cfg = weights.config();
  const std::size_t n = cfg.grid.port_count();
  const std::size_t dd = cfg.d_dec;
  check_observed(observed, x_enc.rows(), n);

  const Tensor y = kernels::matmul(x_enc, weights[weights.decoder_proj]);
  Tensor z({n, dd});
  const Tensor& token = weights[weights.mask_token];
  for (std::size_t p = 0; p < n; ++p) std::copy_n(token.data(), dd, z.row(p).begin());
  for (std::size_t r = 0; r < observed.size(); ++r) {
    const auto src = y.row(r);
    std::copy(src.begin(), src.end(), z.row(observed[r]).begin());
  }
  z += weights.decoder_pe();

  if (trace) trace->decoder.assign(cfg.depth_dec, {});
  for (std::size_t b = 0; b < cfg.depth_dec; ++b) {
    z = layers::decoder_block_forward(z, weights, b, trace ? &trace->decoder[b] : nullptr);
  }
  Tensor out = kernels::matmul(z, weights[weights.recon_head]);
  if (trace) trace->head_in = std::move(z);
  return out;
}

Tensor forward(const Tensor& input, const MaskSpec& mask, const SSNetWeights& weights,
               const RunOptions& options, ForwardTrace* trace) {
  const SSNetConfig& cfg = weights.config();
  if (input.rank() != 2 || input.rows() != cfg.grid.port_count() ||
      input.cols() != cfg.token_width()) {
    throw Error(ErrorKind::dimension, "forward: input " + shape_string(input.shape()) +
                                          " does not match the " +
                                          std::to_string(cfg.grid.port_count()) + "×" +
                                          std::to_string(cfg.token_width()) + " grid layout");
  }
  const Tensor u_b = gather_rows(input, mask.observed);
  const Tensor x_enc = encode(u_b, mask.observed, weights, options, trace);
  return decode(x_enc, mask.observed, weights, options, trace);
}

void backward(const ForwardTrace& trace, const Tensor& d_out, const SSNetWeights& weights,
              const RunOptions& options, GradSet& grads) {
  const SSNetConfig& cfg = weights.config();
  const std::size_t dd = cfg.d_dec;

  kernels::matmul_tn_acc(trace.head_in, d_out, grads[weights.recon_head]);
  Tensor dz = kernels::matmul_nt(d_out, weights[weights.recon_head]);
  for (std::size_t b = cfg.depth_dec; b-- > 0;) {
    dz = layers::decoder_block_backward(dz, weights, b, options, trace.decoder[b], grads);
  }

  // observed rows flow back to the projection, all others to the mask token
  std::vector<char> is_obs(cfg.grid.port_count(), 0);
  for (std::size_t p : trace.observed) is_obs[p] = 1;
  Tensor& dtoken = grads[weights.mask_token];
  for (std::size_t p = 0; p < is_obs.size(); ++p) {
    if (is_obs[p]) continue;
    const auto src = dz.row(p);
    for (std::size_t c = 0; c < dd; ++c) dtoken[c] += src[c];
  }
  const Tensor dy = gather_rows(dz, trace.observed);
  kernels::matmul_tn_acc(trace.x_enc, dy, grads[weights.decoder_proj]);
  Tensor dx = kernels::matmul_nt(dy, weights[weights.decoder_proj]);

  for (std::size_t b = cfg.depth_enc; b-- > 0;) {
    dx = layers::encoder_block_backward(dx, weights, b, options, trace.encoder[b], grads);
  }
  kernels::matmul_tn_acc(trace.u_b, dx, grads[weights.input_proj]);
}

double masked_loss(const Tensor& pred, const Tensor& truth, const MaskSpec& mask, Tensor* d_pred,
                   double scale) {
  if (!pred.same_shape(truth)) {
    throw Error(ErrorKind::dimension, "masked_loss: prediction " + shape_string(pred.shape()) +
                                          " vs truth " + shape_string(truth.shape()));
  }
  if (mask.masked.empty()) throw Error(ErrorKind::metric, "masked_loss: no masked ports");
  double err = 0.0;
  double energy = 0.0;
  for (std::size_t p : mask.masked) {
    const auto a = pred.row(p);
    const auto t = truth.row(p);
    for (std::size_t c = 0; c < a.size(); ++c) {
      err += (a[c] - t[c]) * (a[c] - t[c]);
      energy += t[c] * t[c];
    }
  }
  if (!(energy > 0.0)) throw Error(ErrorKind::metric, "masked_loss: zero target energy");
  if (d_pred) {
    *d_pred = Tensor(pred.shape());
    const double k = 2.0 * scale / energy;
    for (std::size_t p : mask.masked) {
      const auto a = pred.row(p);
      const auto t = truth.row(p);
      auto g = d_pred->row(p);
      for (std::size_t c = 0; c < a.size(); ++c) g[c] = k * (a[c] - t[c]);
    }
  }
  return err / energy;
}

std::vector<std::vector<std::uint32_t>> routing_of(const ForwardTrace& trace) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(trace.encoder.size());
  for (const auto& block : trace.encoder) out.push_back(block.moe.selected);
  return out;
}

std::vector<std::vector<std::size_t>> expert_counts(const ForwardTrace& trace,
                                                    const SSNetConfig& config) {
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& block : trace.encoder) {
    std::vector<std::size_t> c(config.experts, 0);
    for (std::uint32_t e : block.moe.selected) ++c[e];
    counts.push_back(std::move(c));
  }
  return counts;
}

GradCheckReport check_gradients(SSNetWeights& weights, const Tensor& sample, const MaskSpec& mask,
                                const GradCheckOptions& options, bool exact_backward) {
  ForwardTrace probe;
  forward(sample, mask, weights, {}, &probe);
  const auto routing = routing_of(probe);

  RunOptions opts;
  opts.fixed_routing = &routing;
  opts.exact_backward = exact_backward;
  GradSet grads = make_grad_set(weights);
  auto& params = weights.params();
  const LossFn loss = [&](bool compute_grad) {
    if (!compute_grad) return masked_loss(forward(sample, mask, weights, opts), sample, mask);
    ForwardTrace trace;
    const Tensor pred = forward(sample, mask, weights, opts, &trace);
    Tensor d_pred;
    const double value = masked_loss(pred, sample, mask, &d_pred);
    zero(grads);
    backward(trace, d_pred, weights, opts, grads);
    for (std::size_t k = 0; k < params.size(); ++k) params[k].grad = grads[k];
    return value;
  };
  return grad_check(loss, params, options);
}

}  // namespace fas
