#include <benchmark/benchmark.h>

#include "strotss/feature_net.hpp"
#include "strotss/image_ops.hpp"
#include "strotss/losses.hpp"
#include "strotss/ops.hpp"
#include "strotss/ot_oracle.hpp"
#include "strotss/random.hpp"
#include "strotss/stylize.hpp"

using namespace strotss;

static Tensor random_tensor(Shape shape, Rng& rng, float lo, float hi) {
  Tensor t(shape);
  for (float& v : t.data()) v = static_cast<float>(lo + (hi - lo) * rng.uniform());
  return t;
}

// args: channels in, channels out, side
static void BM_conv2d_forward_backward(benchmark::State& state) {
  const std::size_t cin = state.range(0), cout = state.range(1), side = state.range(2);
  Rng rng(1);
  const Tensor x = random_tensor({cin, side, side}, rng, -1, 1);
  const Tensor k = random_tensor({cout, cin, 3, 3}, rng, -0.1f, 0.1f);
  const Tensor b = random_tensor({cout}, rng, -0.1f, 0.1f);
  for (auto _ : state) {
    Graph g;
    Var in = g.leaf(x);
    Var out = conv2d(in, g.constant(k), g.constant(b));
    g.backward(sum(out));
    benchmark::DoNotOptimize(g.grad(in).raw());
  }
  state.SetItemsProcessed(state.iterations() * cin * cout * side * side * 9);
}
BENCHMARK(BM_conv2d_forward_backward)
    ->Args({3, 64, 64})
    ->Args({64, 64, 64})
    ->Args({128, 128, 32})
    ->Args({512, 512, 8})
    ->Unit(benchmark::kMillisecond);

// args: n samples, feature dim
static void BM_cosine_cost_remd(benchmark::State& state) {
  const std::size_t n = state.range(0), d = state.range(1);
  Rng rng(2);
  const Tensor a = random_tensor({n, d}, rng, -1, 1);
  const Tensor b = random_tensor({n, d}, rng, -1, 1);
  for (auto _ : state) {
    Graph g;
    Var va = g.leaf(a);
    Var r = relaxed_emd(cosine_cost(va, g.constant(b))).remd;
    g.backward(r);
    benchmark::DoNotOptimize(g.grad(va).raw());
  }
}
BENCHMARK(BM_cosine_cost_remd)->Args({1024, 2176})->Args({1024, 64})->Args({256, 2176})
    ->Unit(benchmark::kMillisecond);

static void BM_hungarian(benchmark::State& state) {
  const std::size_t n = state.range(0);
  Rng rng(3);
  BasicTensor<double> c(Shape{n, n});
  for (double& v : c.data()) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(exact_emd_uniform(c).cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_hungarian)->RangeMultiplier(2)->Range(16, 512)->Complexity(benchmark::oNCubed)
    ->Unit(benchmark::kMillisecond);

// One optimization step (forward, backward, update) at a single scale.
static void BM_stylize_step(benchmark::State& state) {
  const std::size_t side = state.range(0);
  Rng rng(4);
  const Tensor content = random_tensor({3, side, side}, rng, 0, 1);
  const Tensor style = random_tensor({3, side, side}, rng, 0, 1);
  const WeightStore weights = random_weights(7);
  StylizeConfig cfg;
  cfg.scale_count = 1;
  cfg.iterations = 1;
  cfg.base_long_side = side;
  for (auto _ : state) {
    StylizeResult r = stylize(content, style, weights, cfg);
    benchmark::DoNotOptimize(r.image.raw());
  }
}
BENCHMARK(BM_stylize_step)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
