#include <benchmark/benchmark.h>

#include "fas/cli/run_config.hpp"
#include "fas/model/ssnet.hpp"
#include "fas/numerics/kernels.hpp"
#include "fas/numerics/rng.hpp"

namespace {

using fas::Tensor;

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Tensor t({rows, cols});
  fas::RngStream rng(seed, "bench");
  for (double& v : t.values()) v = rng.normal();
  return t;
}

template <Tensor (*Op)(const Tensor&, const Tensor&)>
void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_matrix(n, n, 1);
  const Tensor b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Op(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

template <Tensor (*Op)(const Tensor&)>
void bm_softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Op(x));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

Tensor kernel_layer_norm(const Tensor& x, const Tensor& g, const Tensor& b, double eps) {
  return fas::kernels::layer_norm(x, g, b, eps);
}

template <Tensor (*Op)(const Tensor&, const Tensor&, const Tensor&, double)>
void bm_layer_norm(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_matrix(rows, 64, 4);
  const Tensor g = random_matrix(1, 64, 5);
  const Tensor b = random_matrix(1, 64, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Op(x, g, b, 1e-5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows * 64));
}

void bm_ssnet_step(benchmark::State& state) {
  const fas::RunConfig rc = fas::RunConfig::preset("desk");
  const fas::SSNetWeights w = fas::SSNetWeights::initialize(rc.model, 1);
  const Tensor x = random_matrix(rc.model.grid.port_count(), rc.model.token_width(), 7);
  fas::RngStream mask_rng(8, "mask");
  const fas::MaskSpec mask = fas::make_mask(rc.model.grid.port_count(), 0.75, mask_rng);
  fas::GradSet grads = fas::make_grad_set(w);
  for (auto _ : state) {
    fas::ForwardTrace trace;
    const Tensor pred = fas::forward(x, mask, w, {}, &trace);
    Tensor d_pred;
    benchmark::DoNotOptimize(fas::masked_loss(pred, x, mask, &d_pred));
    fas::backward(trace, d_pred, w, {}, grads);
  }
}

}  // namespace

BENCHMARK(bm_matmul<fas::reference::matmul>)->Name("matmul/reference")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_matmul<fas::kernels::matmul>)->Name("matmul/kernels")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_matmul<fas::reference::matmul_nt>)->Name("matmul_nt/reference")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_matmul<fas::kernels::matmul_nt>)->Name("matmul_nt/kernels")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_matmul<fas::reference::matmul_tn>)->Name("matmul_tn/reference")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_matmul<fas::kernels::matmul_tn>)->Name("matmul_tn/kernels")->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(bm_softmax<fas::reference::softmax_rows>)->Name("softmax_rows/reference")->RangeMultiplier(4)->Range(16, 512);
BENCHMARK(bm_softmax<fas::kernels::softmax_rows>)->Name("softmax_rows/kernels")->RangeMultiplier(4)->Range(16, 512);
BENCHMARK(bm_layer_norm<fas::reference::layer_norm>)->Name("layer_norm/reference")->RangeMultiplier(8)->Range(64, 4096);
BENCHMARK(bm_layer_norm<kernel_layer_norm>)->Name("layer_norm/kernels")->RangeMultiplier(8)->Range(64, 4096);
BENCHMARK(bm_ssnet_step)->Name("ssnet/desk_forward_backward")->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
