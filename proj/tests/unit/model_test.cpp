#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "fas/cli/run_config.hpp"
#include "fas/error.hpp"
#include "fas/model/checkpoint.hpp"
#include "fas/model/layers.hpp"
#include "fas/model/mask.hpp"
#include "fas/model/positional.hpp"
#include "fas/model/ssnet.hpp"
#include "fas/numerics/kernels.hpp"
#include "test_util.hpp"

namespace fas {
namespace {

SSNetConfig tiny_config() { return RunConfig::preset("tiny").model; }

SSNetConfig small_config() {
  SSNetConfig c = tiny_config();
  c.experts = 4;
  c.active_experts = 2;
  c.depth_enc = 2;
  return c;
}

Tensor sample_for(const SSNetConfig& c, std::uint64_t seed) {
  return test::random_tensor({c.grid.port_count(), c.token_width()}, seed);
}

MaskSpec mask_for(const SSNetConfig& c, double ratio, std::uint64_t seed) {
  RngStream rng(seed, "mask");
  return make_mask(c.grid.port_count(), ratio, rng);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no fas::Error thrown";
  return ErrorKind::numeric;
}

// ---------------------------------------------------------------------------
// Masks

TEST(Mask, ObservedCountsRoundToNearest) {
  EXPECT_EQ(MaskSpec::observed_count(512, 0.9), 51u);
  EXPECT_EQ(MaskSpec::observed_count(512, 0.75), 128u);
  EXPECT_EQ(MaskSpec::observed_count(512, 0.5), 256u);
  RngStream rng(1, "mask");
  const MaskSpec m = make_mask(512, 0.9, rng);
  EXPECT_EQ(m.observed.size(), 51u);
  EXPECT_EQ(m.masked.size(), 461u);
  EXPECT_TRUE(std::is_sorted(m.observed.begin(), m.observed.end()));
  std::set<std::size_t> all(m.observed.begin(), m.observed.end());
  all.insert(m.masked.begin(), m.masked.end());
  EXPECT_EQ(all.size(), 512u);
}

TEST(Mask, SameStreamSameMask) {
  RngStream a(5, "mask"), b(5, "mask"), c(6, "mask");
  const MaskSpec ma = make_mask(64, 0.75, a);
  EXPECT_EQ(ma.observed, make_mask(64, 0.75, b).observed);
  EXPECT_NE(ma.observed, make_mask(64, 0.75, c).observed);
}

TEST(Mask, DegenerateRatiosAreConfigErrors) {
  RngStream rng(1, "mask");
  EXPECT_EQ(kind_of([&] { make_mask(16, 1.0, rng); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { make_mask(16, 0.0, rng); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { MaskSpec::from_observed(4, {}); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { MaskSpec::from_observed(4, {4}); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { MaskSpec::from_observed(4, {1, 1}); }), ErrorKind::config);
  const MaskSpec full = MaskSpec::all_observed(4);
  EXPECT_EQ(full.observed.size(), 4u);
  EXPECT_TRUE(full.masked.empty());
}

// ---------------------------------------------------------------------------
// Positional encoding and embedding

TEST(PositionalEncoding, KnownValues) {
  const PortGrid g{2, 3, 0.02, 0.04, 0.0857};
  const Tensor pe = positional_encoding_2d(g, 8);
  // port 0 sits at (0, 0): sin terms 0, cos terms 1
  for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(pe(0, c), c % 2 == 0 ? 0.0 : 1.0);
  // port 5 = (1, 2); first frequency is 1, second 10000^(-1/4) = 0.1
  EXPECT_NEAR(pe(5, 0), std::sin(1.0), 1e-15);
  EXPECT_NEAR(pe(5, 1), std::cos(1.0), 1e-15);
  EXPECT_NEAR(pe(5, 2), std::sin(0.1), 1e-15);
  EXPECT_NEAR(pe(5, 4), std::sin(2.0), 1e-15);
  EXPECT_NEAR(pe(5, 7), std::cos(0.2), 1e-15);
  EXPECT_EQ(kind_of([&] { positional_encoding_2d(g, 6); }), ErrorKind::config);
}

TEST(PositionalEncoding, DistinctAcrossFullGrid) {
  const PortGrid g{16, 32, 0.02, 0.04, 0.0857};
  const Tensor pe = positional_encoding_2d(g, 64);
  double closest = 1e9;
  for (std::size_t a = 0; a < g.port_count(); ++a)
    for (std::size_t b = a + 1; b < g.port_count(); ++b) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 64; ++c) d2 += (pe(a, c) - pe(b, c)) * (pe(a, c) - pe(b, c));
      closest = std::min(closest, d2);
    }
  EXPECT_GT(closest, 1e-6);
}

TEST(Embed, ProjectionPlusPositionOfTheSourcePort) {
  const SSNetConfig c = tiny_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 3);
  const Tensor u = test::random_tensor({2, c.token_width()}, 4);
  const std::vector<std::size_t> obs{3, 9};
  const Tensor x = embed(u, obs, w);
  const Tensor proj = reference::matmul(u, w[w.input_proj]);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t k = 0; k < c.d_model; ++k)
      EXPECT_NEAR(x(r, k), proj(r, k) + w.encoder_pe()(obs[r], k), 1e-14);
  EXPECT_EQ(kind_of([&] { embed(test::random_tensor({2, 3}, 1), obs, w); }), ErrorKind::dimension);
}

// ---------------------------------------------------------------------------
// Attention

SSNetConfig width4_config() {
  SSNetConfig c = tiny_config();
  c.d_model = 4;
  c.d_dec = 4;
  c.heads = 1;
  return c;
}

void set_identity(SSNetWeights& w, const MsaIds& ids) {
  for (ParamId p : {ids.wq, ids.wk, ids.wv, ids.wo}) w.value(p) = Tensor::identity(4);
}

TEST(Attention, SingleTokenIsValueThenOutputProjection) {
  const SSNetConfig c = tiny_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 5);
  const MsaIds& ids = w.encoder[0].msa1;
  const Tensor x = test::random_tensor({1, c.d_model}, 6);
  const Tensor expected = reference::matmul(reference::matmul(x, w[ids.wv]), w[ids.wo]);
  EXPECT_LT(max_abs_diff(layers::msa_forward(x, w, ids, c.heads, nullptr), expected), 1e-13);
}

TEST(Attention, IdenticalTokensAttendUniformly) {
  const SSNetConfig c = tiny_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 5);
  const MsaIds& ids = w.encoder[0].msa1;
  const Tensor one = test::random_tensor({1, c.d_model}, 7);
  Tensor x({5, c.d_model});
  for (std::size_t r = 0; r < 5; ++r) std::copy_n(one.data(), c.d_model, x.row(r).begin());
  layers::MsaCache cache;
  const Tensor y = layers::msa_forward(x, w, ids, c.heads, &cache);
  const Tensor expected = reference::matmul(reference::matmul(one, w[ids.wv]), w[ids.wo]);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t k = 0; k < c.d_model; ++k) EXPECT_NEAR(y(r, k), expected(0, k), 1e-13);
  for (double a : cache.attn[0].values()) EXPECT_NEAR(a, 0.2, 1e-15);
}

TEST(Attention, HandComputedThreeTokens) {
  SSNetWeights w(width4_config());
  const MsaIds& ids = w.encoder[0].msa1;
  set_identity(w, ids);
  const Tensor x = Tensor::matrix(3, 4, {1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0});
  // scores = x xᵀ / 2
  const double s[3][3] = {{0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}, {0.5, 0.5, 1.0}};
  Tensor expected({3, 4});
  for (int i = 0; i < 3; ++i) {
    double z = 0.0;
    for (int j = 0; j < 3; ++j) z += std::exp(s[i][j]);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 4; ++k) expected(i, k) += std::exp(s[i][j]) / z * x(j, k);
  }
  EXPECT_LT(max_abs_diff(layers::msa_forward(x, w, ids, 1, nullptr), expected), 1e-14);
}

// ---------------------------------------------------------------------------
// Mixture of experts

TEST(Moe, SingleExpertIsThatExpert) {
  SSNetConfig c = tiny_config();
  c.experts = 1;
  c.active_experts = 1;
  const SSNetWeights w = SSNetWeights::initialize(c, 8);
  const MoeIds& ids = w.encoder[0].moe;
  const Tensor x = test::random_tensor({6, c.d_model}, 9);
  const Tensor y = layers::moe_forward(x, w, ids, {}, 0, nullptr);
  EXPECT_LT(max_abs_diff(y, layers::mlp_forward(x, w, ids.experts[0], nullptr)), 1e-13);
}

TEST(Moe, IdenticalExpertsWithAllActiveSumToOneExpert) {
  SSNetConfig c = tiny_config();
  c.experts = 2;
  c.active_experts = 2;
  SSNetWeights w = SSNetWeights::initialize(c, 10);
  const MoeIds& ids = w.encoder[0].moe;
  w.value(ids.experts[1].w1) = w[ids.experts[0].w1];
  w.value(ids.experts[1].w2) = w[ids.experts[0].w2];
  const Tensor x = test::random_tensor({6, c.d_model}, 11);
  const Tensor y = layers::moe_forward(x, w, ids, {}, 0, nullptr);
  EXPECT_LT(max_abs_diff(y, layers::mlp_forward(x, w, ids.experts[0], nullptr)), 1e-13);
}

TEST(Moe, GateBiasPicksTopTwoWithRawScores) {
  SSNetConfig c = tiny_config();
  c.experts = 4;
  c.active_experts = 2;
  SSNetWeights w = SSNetWeights::initialize(c, 12);
  const MoeIds& ids = w.encoder[0].moe;
  w.value(ids.gate_w).fill(0.0);
  w.value(ids.gate_b) = Tensor::matrix(1, 4, {std::log(0.4), std::log(0.3), std::log(0.2), std::log(0.1)});
  const Tensor x = test::random_tensor({3, c.d_model}, 13);
  layers::MoeCache cache;
  const Tensor y = layers::moe_forward(x, w, ids, {}, 0, &cache);
  const Tensor e0 = layers::mlp_forward(x, w, ids.experts[0], nullptr);
  const Tensor e1 = layers::mlp_forward(x, w, ids.experts[1], nullptr);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(cache.selected[2 * t], 0u);
    EXPECT_EQ(cache.selected[2 * t + 1], 1u);
    EXPECT_NEAR(cache.mix[2 * t], 0.4, 1e-15);
    EXPECT_NEAR(cache.mix[2 * t + 1], 0.3, 1e-15);
  }
  EXPECT_LT(max_abs_diff(y, e0 * 0.4 + e1 * 0.3), 1e-13);

  c.renormalize_topk = true;
  SSNetWeights wr(c);
  wr.params() = w.params();
  layers::MoeCache rc;
  layers::moe_forward(x, wr, wr.encoder[0].moe, {}, 0, &rc);
  EXPECT_NEAR(rc.mix[0], 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(rc.mix[1], 3.0 / 7.0, 1e-15);
}

TEST(Moe, TiedScoresGoToLowerExpert) {
  SSNetConfig c = tiny_config();
  c.experts = 4;
  c.active_experts = 1;
  SSNetWeights w = SSNetWeights::initialize(c, 14);
  const MoeIds& ids = w.encoder[0].moe;
  w.value(ids.gate_w).fill(0.0);
  w.value(ids.gate_b) = Tensor::matrix(1, 4, {0.0, 1.0, 1.0, 0.0});
  layers::MoeCache cache;
  layers::moe_forward(test::random_tensor({2, c.d_model}, 15), w, ids, {}, 0, &cache);
  EXPECT_EQ(cache.selected[0], 1u);
  EXPECT_EQ(cache.selected[1], 1u);
}

TEST(Moe, GateScoresSumToOneAndOnlyKExpertsContribute) {
  const SSNetConfig c = small_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 16);
  ForwardTrace trace;
  forward(sample_for(c, 17), mask_for(c, 0.5, 18), w, {}, &trace);
  for (const auto& block : trace.encoder) {
    const layers::MoeCache& m = block.moe;
    for (std::size_t t = 0; t < m.probs.rows(); ++t) {
      double sum = 0.0;
      for (double p : m.probs.row(t)) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-12);
      std::set<std::uint32_t> chosen(m.selected.begin() + static_cast<long>(2 * t),
                                     m.selected.begin() + static_cast<long>(2 * t + 2));
      EXPECT_EQ(chosen.size(), 2u);
    }
  }
  const auto counts = expert_counts(trace, c);
  for (const auto& per_block : counts) {
    std::size_t total = 0;
    for (std::size_t n : per_block) total += n;
    EXPECT_EQ(total, 2 * trace.observed.size());
  }
}

// ---------------------------------------------------------------------------
// Blocks and the full network

TEST(EncoderBlock, FiniteAndPermutationEquivariant) {
  const SSNetConfig c = small_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 19);
  const Tensor x = test::random_tensor({7, c.d_model}, 20);
  const Tensor y = layers::encoder_block_forward(x, w, 0, {}, nullptr);
  EXPECT_TRUE(y.all_finite());
  const std::vector<std::size_t> perm{4, 0, 6, 2, 1, 5, 3};
  Tensor xp({7, c.d_model});
  for (std::size_t r = 0; r < 7; ++r) std::copy_n(x.row(perm[r]).begin(), c.d_model, xp.row(r).begin());
  const Tensor yp = layers::encoder_block_forward(xp, w, 0, {}, nullptr);
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t k = 0; k < c.d_model; ++k) EXPECT_NEAR(yp(r, k), y(perm[r], k), 1e-12);
}

TEST(EncoderBlock, InputGradientMatchesFiniteDifferences) {
  const SSNetConfig c = small_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 21);
  const Tensor x = test::random_tensor({5, c.d_model}, 22);
  const Tensor probe = test::random_tensor({5, c.d_model}, 23);
  layers::EncoderBlockCache cache;
  layers::encoder_block_forward(x, w, 0, {}, &cache);
  std::vector<std::vector<std::uint32_t>> routing(c.depth_enc);
  routing[0] = cache.moe.selected;
  layers::RunOptions frozen;
  frozen.fixed_routing = &routing;
  GradSet grads = make_grad_set(w);
  const Tensor analytic = layers::encoder_block_backward(probe, w, 0, frozen, cache, grads);
  const Tensor numeric = test::numeric_gradient(
      [&](const Tensor& xi) {
        return test::dot(probe, layers::encoder_block_forward(xi, w, 0, frozen, nullptr));
      },
      x, 1e-6);
  EXPECT_LT(test::max_rel_error(analytic, numeric, 1e-5), 1e-5);
}

TEST(Ssnet, ZeroDepthEncoderIsEmbedding) {
  SSNetConfig c = tiny_config();
  c.depth_enc = 0;
  const SSNetWeights w = SSNetWeights::initialize(c, 24);
  const Tensor u = test::random_tensor({3, c.token_width()}, 25);
  const std::vector<std::size_t> obs{0, 5, 6};
  EXPECT_EQ(encode(u, obs, w, {}), embed(u, obs, w));
}

TEST(Ssnet, DecoderFillsMaskTokenAndHeadsEveryPort) {
  SSNetConfig c = tiny_config();
  c.depth_dec = 0;
  const SSNetWeights w = SSNetWeights::initialize(c, 26);
  const std::vector<std::size_t> obs{2, 11};
  const Tensor x = test::random_tensor({2, c.d_model}, 27);
  const Tensor out = decode(x, obs, w, {});
  ASSERT_EQ(out.rows(), 16u);
  ASSERT_EQ(out.cols(), c.token_width());
  const Tensor y = reference::matmul(x, w[w.decoder_proj]);
  Tensor z({16, c.d_dec});
  for (std::size_t p = 0; p < 16; ++p)
    for (std::size_t k = 0; k < c.d_dec; ++k) {
      const double base = p == 2 ? y(0, k) : p == 11 ? y(1, k) : w[w.mask_token](0, k);
      z(p, k) = base + w.decoder_pe()(p, k);
    }
  EXPECT_LT(max_abs_diff(out, reference::matmul(z, w[w.recon_head])), 1e-13);
}

TEST(Ssnet, MaskedRowsNeverReachTheOutput) {
  const SSNetConfig c = small_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 28);
  const MaskSpec m = mask_for(c, 0.75, 29);
  Tensor a = sample_for(c, 30);
  Tensor b = a;
  for (std::size_t p : m.masked)
    for (double& v : b.row(p)) v = 1e3 * v + 7.0;
  EXPECT_EQ(forward(a, m, w), forward(b, m, w));
}

TEST(Ssnet, AllObservedAndOutputShape) {
  const SSNetConfig c = tiny_config();
  const SSNetWeights w = SSNetWeights::initialize(c, 31);
  const Tensor s = sample_for(c, 32);
  const Tensor out = forward(s, MaskSpec::all_observed(16), w);
  EXPECT_EQ(out.shape(), (std::vector<std::size_t>{16, c.token_width()}));
  EXPECT_TRUE(out.all_finite());
  EXPECT_EQ(kind_of([&] { masked_loss(out, s, MaskSpec::all_observed(16)); }), ErrorKind::metric);
  EXPECT_EQ(kind_of([&] { forward(test::random_tensor({15, c.token_width()}, 1), MaskSpec::all_observed(15), w); }),
            ErrorKind::dimension);
}

TEST(Ssnet, VariableObservedCountsOnFullGrid) {
  const SSNetConfig c = RunConfig::preset("full").model;
  const SSNetWeights w = SSNetWeights::initialize(c, 33);
  const Tensor s = sample_for(c, 34);
  for (std::size_t k : {1u, 25u, 128u, 512u}) {
    std::vector<std::size_t> obs(k);
    for (std::size_t i = 0; i < k; ++i) obs[i] = (i * 97) % 512;
    const MaskSpec m = k == 512 ? MaskSpec::all_observed(512) : MaskSpec::from_observed(512, obs);
    const Tensor out = forward(s, m, w);
    EXPECT_EQ(out.rows(), 512u) << k;
    EXPECT_TRUE(out.all_finite()) << k;
  }
}

TEST(MaskedLoss, KnownValuesAndGradient) {
  const Tensor truth = Tensor::matrix(3, 2, {1, 0, 0, 2, 5, 5});
  const Tensor pred = Tensor::matrix(3, 2, {0, 0, 0, 1, -9, 9});
  const MaskSpec m = MaskSpec::from_observed(3, {2});
  Tensor grad;
  // error 1 + 1, energy 1 + 4
  EXPECT_DOUBLE_EQ(masked_loss(pred, truth, m, &grad, 2.0), 0.4);
  EXPECT_DOUBLE_EQ(grad(0, 0), 2.0 * 2.0 * -1.0 / 5.0);
  EXPECT_DOUBLE_EQ(grad(1, 1), 2.0 * 2.0 * -1.0 / 5.0);
  EXPECT_EQ(grad(2, 0), 0.0);
  EXPECT_EQ(masked_loss(truth, truth, m), 0.0);
  EXPECT_EQ(kind_of([&] { masked_loss(pred, Tensor({3, 2}), m); }), ErrorKind::metric);
}

struct Variant {
  const char* name;
  std::function<void(SSNetConfig&)> edit;
};

class GradCheckVariants : public ::testing::TestWithParam<Variant> {};

TEST_P(GradCheckVariants, EndToEndBackwardMatchesFiniteDifferences) {
  SSNetConfig c = small_config();
  GetParam().edit(c);
  SSNetWeights w = SSNetWeights::initialize(c, 35);
  GradCheckOptions opt;
  opt.max_coords_per_param = 24;
  const GradCheckReport r = check_gradients(w, sample_for(c, 36), mask_for(c, 0.75, 37), opt);
  EXPECT_TRUE(r.passed()) << r.worst_param << "[" << r.worst_index << "] rel " << r.max_rel_error;
  EXPECT_GT(r.coords_checked, 100u);
}

INSTANTIATE_TEST_SUITE_P(
    Model, GradCheckVariants,
    ::testing::Values(Variant{"plain", [](SSNetConfig&) {}},
                      Variant{"residual", [](SSNetConfig& c) { c.moe_residual = true; }},
                      Variant{"renormalized", [](SSNetConfig& c) { c.renormalize_topk = true; }},
                      Variant{"ffn", [](SSNetConfig& c) { c.use_moe = false; }},
                      Variant{"all_experts", [](SSNetConfig& c) { c.active_experts = 4; }},
                      Variant{"deep_decoder", [](SSNetConfig& c) { c.depth_dec = 2; }},
                      Variant{"no_encoder", [](SSNetConfig& c) { c.depth_enc = 0; }}),
    [](const ::testing::TestParamInfo<Variant>& info) { return std::string(info.param.name); });

TEST(GradCheck, BrokenNormBackwardIsCaught) {
  const SSNetConfig c = small_config();
  SSNetWeights w = SSNetWeights::initialize(c, 35);
  GradCheckOptions opt;
  opt.max_coords_per_param = 24;
  const GradCheckReport r = check_gradients(w, sample_for(c, 36), mask_for(c, 0.75, 37), opt, false);
  EXPECT_FALSE(r.passed());
  EXPECT_GT(r.max_rel_error, 1e-2);
}

// ---------------------------------------------------------------------------
// Config and checkpoints

TEST(Config, EntriesRoundTripAndValidation) {
  SSNetConfig c = small_config();
  c.moe_residual = true;
  c.dropout = 0.25;
  EXPECT_EQ(SSNetConfig::from_entries(c.to_entries()), c);
  c.d_model = 18;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
  c = small_config();
  c.d_dec = 32;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
  c = small_config();
  c.active_experts = 5;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto dir = test::scratch_dir("checkpoint");
  Checkpoint ck{SSNetWeights::initialize(small_config(), 38), false, {{"epoch", "12"}}};
  save_checkpoint(ck, dir / "a.ssnw");
  const Checkpoint back = load_checkpoint(dir / "a.ssnw");
  EXPECT_EQ(back.weights.config(), ck.weights.config());
  ASSERT_EQ(back.weights.params().size(), ck.weights.params().size());
  for (std::size_t i = 0; i < ck.weights.params().size(); ++i) {
    EXPECT_EQ(back.weights.params()[i].name, ck.weights.params()[i].name);
    EXPECT_EQ(back.weights.params()[i].value, ck.weights.params()[i].value);
  }
  EXPECT_EQ(back.meta_value("epoch"), std::optional<std::string>("12"));
  EXPECT_FALSE(back.meta_value("missing"));
}

TEST(Checkpoint, CorruptFilesAreIoErrors) {
  const auto dir = test::scratch_dir("checkpoint_bad");
  Checkpoint ck{SSNetWeights::initialize(tiny_config(), 39), false, {}};
  save_checkpoint(ck, dir / "a.ssnw");
  const auto size = std::filesystem::file_size(dir / "a.ssnw");
  std::filesystem::resize_file(dir / "a.ssnw", size / 2);
  EXPECT_EQ(kind_of([&] { load_checkpoint(dir / "a.ssnw"); }), ErrorKind::io);
  std::ofstream(dir / "b.ssnw") << "not a checkpoint";
  EXPECT_EQ(kind_of([&] { load_checkpoint(dir / "b.ssnw"); }), ErrorKind::io);
  EXPECT_EQ(kind_of([&] { load_checkpoint(dir / "missing.ssnw"); }), ErrorKind::io);
}

}  // namespace
}  // namespace fas
