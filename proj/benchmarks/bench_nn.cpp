#include <benchmark/benchmark.h>

#include "taaco/nn.hpp"

namespace {

using namespace taaco;

Tensor random_input(int64_t n, int64_t d, uint64_t seed) {
  Rng rng(seed);
  Tensor x(n, d);
  for (int64_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  return x;
}

void BM_Gemm96(benchmark::State& state) {
  Rng rng(3);
  Tensor a = random_input(state.range(0), 96, 1);
  Tensor b = random_input(96, 96, 2);
  Tensor c(state.range(0), 96);
  for (auto _ : state) {
    gemm_nn(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0) * 96 * 96);
}
BENCHMARK(BM_Gemm96)->Arg(34)->Arg(45)->Arg(512);

void BM_EncoderForward(benchmark::State& state) {
  EncoderConfig config;
  config.seed = 7;
  Rng rng(config.seed);
  EncoderParams params = EncoderParams::init(config, rng);
  Tensor x = random_input(state.range(0), config.model_dim, 11);
  for (auto _ : state) {
    auto out = encoder_forward(x, params);
    benchmark::DoNotOptimize(out.features.data());
  }
}
BENCHMARK(BM_EncoderForward)->Arg(34)->Arg(45);

void BM_EncoderForwardBackward(benchmark::State& state) {
  EncoderConfig config;
  config.seed = 7;
  Rng rng(config.seed);
  EncoderParams params = EncoderParams::init(config, rng);
  Tensor x = random_input(state.range(0), config.model_dim, 11);
  for (auto _ : state) {
    Graph g;
    auto out = encoder_forward_graph(g, g.constant(x), params);
    Graph::Var pooled = g.pick_row(out.features, 0);
    Graph::Var logit = g.slice_cols(pooled, 0, 1);
    g.backward(logit);
    benchmark::DoNotOptimize(g.value(out.features).data());
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(34)->Arg(45);

}  // namespace
