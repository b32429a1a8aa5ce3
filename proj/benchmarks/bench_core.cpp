// Microbenchmarks for the hot paths: divergence evaluation, soft
// assignment, graph execution and a full training epoch on a toy problem.

#include <benchmark/benchmark.h>

#include <vector>

#include "dab/codebook.hpp"
#include "dab/config.hpp"
#include "dab/dataset.hpp"
#include "dab/gaussian.hpp"
#include "dab/model.hpp"
#include "dab/rate_distortion.hpp"
#include "dab/rng.hpp"

namespace {

dab::DiagGaussian random_gaussian(std::size_t dim, dab::Rng& rng) {
  dab::DiagGaussian g;
  g.mean.resize(dim);
  g.scale.resize(dim);
  for (auto& v : g.mean) v = rng.normal();
  for (auto& v : g.scale) v = 0.5 + rng.uniform();
  return g;
}

void BM_GaussianKl(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  dab::Rng rng(7);
  auto p = random_gaussian(dim, rng);
  auto q = random_gaussian(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dab::kl(p, q));
}
BENCHMARK(BM_GaussianKl)->Arg(8)->Arg(80);

void BM_AssignmentProbs(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  dab::Rng rng(7);
  std::vector<double> d(k), pi(k, 1.0 / double(k));
  for (auto& v : d) v = 10.0 * rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(dab::assignment_probs(d, pi, 2.0));
}
BENCHMARK(BM_AssignmentProbs)->Arg(10)->Arg(1000);

void BM_DistancesToCodebook(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  dab::Rng rng(7);
  dab::Codebook cb = dab::make_codebook(k, 8, 1.0, 0.99, rng);
  auto enc = random_gaussian(8, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dab::distances_to(cb, enc));
}
BENCHMARK(BM_DistancesToCodebook)->Arg(10)->Arg(1000);

dab::DabModel toy_model(std::size_t batch_hint) {
  (void)batch_hint;
  dab::DabConfig cfg;
  cfg.input_dim = 1;
  cfg.latent_dim = 8;
  cfg.encoder_hidden = {100, 100};
  cfg.k = 2;
  cfg.epochs = 1;
  return dab::DabModel(cfg);
}

void BM_LossForwardBackward(benchmark::State& state) {
  const std::size_t B = static_cast<std::size_t>(state.range(0));
  dab::DabModel model = toy_model(B);
  dab::Rng rng(7);
  std::vector<std::vector<double>> x(B, std::vector<double>(1));
  std::vector<double> y(B);
  for (std::size_t i = 0; i < B; ++i) {
    x[i][0] = rng.uniform(-4.0, 4.0);
    y[i] = x[i][0] * x[i][0] * x[i][0];
  }
  auto ctx = model.prepare_batch(x, y);
  dab::Tensor noise = dab::Tensor::zeros({B, 8});
  for (auto& v : noise.data) v = rng.normal();
  ctx.bindings["noise"] = noise;
  dab::Graph& g = model.graph();
  for (auto _ : state) {
    dab::Exec ex(g);
    ex.forward(ctx.bindings, {g.output("loss")});
    benchmark::DoNotOptimize(ex.backward(g.output("loss")));
  }
}
BENCHMARK(BM_LossForwardBackward)->Arg(20)->Arg(128);

void BM_TrainEpoch(benchmark::State& state) {
  auto pair = dab::gen_cubic(7, 20);
  for (auto _ : state) {
    state.PauseTiming();
    dab::DabConfig cfg;
    cfg.input_dim = 1;
    cfg.k = 2;
    cfg.epochs = 1;
    dab::DabModel model(cfg);
    state.ResumeTiming();
    benchmark::DoNotOptimize(dab::train(model, pair.train));
  }
}
BENCHMARK(BM_TrainEpoch);

void BM_BlahutArimoto(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  dab::Rng rng(7);
  dab::DiscreteSource src;
  src.probs.assign(n, 1.0 / double(n));
  dab::DistortionMatrix dm;
  dm.d.assign(n, std::vector<double>(n));
  for (auto& row : dm.d)
    for (auto& v : row) v = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) dm.d[i][i] = 0.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(dab::blahut_arimoto(src, dm, 2.0, 1e-10));
}
BENCHMARK(BM_BlahutArimoto)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
