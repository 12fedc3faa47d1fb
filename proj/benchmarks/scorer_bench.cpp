#include <benchmark/benchmark.h>

#include "adpo/rng.hpp"
#include "adpo/scorer.hpp"

using namespace adpo;

namespace {

void BM_ScorerForward(benchmark::State& state) {
  const int batch_items = static_cast<int>(state.range(0));
  const ScorerConfig cfg = ScorerConfig::medium();
  const Scorer scorer = init_scorer(cfg, 1);
  RngStream rng(2);
  std::vector<double> inputs(static_cast<std::size_t>(batch_items) * cfg.input_dim);
  for (double& v : inputs) v = rng.uniform();
  std::vector<double> out(batch_items);
  ScorerWorkspace ws;
  for (auto _ : state) {
    scorer.forward(inputs, batch_items, out, ws);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * batch_items);
}

void BM_ScorerBackward(benchmark::State& state) {
  const int batch_items = static_cast<int>(state.range(0));
  const ScorerConfig cfg = ScorerConfig::medium();
  const Scorer scorer = init_scorer(cfg, 1);
  RngStream rng(2);
  std::vector<double> inputs(static_cast<std::size_t>(batch_items) * cfg.input_dim);
  for (double& v : inputs) v = rng.uniform();
  std::vector<double> upstream(batch_items);
  for (double& v : upstream) v = rng.normal();
  std::vector<double> out(batch_items);
  std::vector<double> grad(cfg.param_count());
  ScorerWorkspace ws;
  for (auto _ : state) {
    scorer.forward(inputs, batch_items, out, ws);
    std::fill(grad.begin(), grad.end(), 0.0);
    scorer.backward(upstream, grad, ws);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * batch_items);
}

void BM_AdamWStep(benchmark::State& state) {
  const ScorerConfig cfg = ScorerConfig::medium();
  Scorer scorer = init_scorer(cfg, 1);
  AdamWState opt = AdamWState::make(cfg);
  RngStream rng(3);
  std::vector<double> grad(cfg.param_count());
  for (double& v : grad) v = 0.01 * rng.normal();
  for (auto _ : state) {
    adamw_step(scorer, opt, grad);
    benchmark::DoNotOptimize(scorer.parameters().data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.param_count());
}

}  // namespace

BENCHMARK(BM_ScorerForward)->Arg(128)->Arg(1024)->Arg(4096);
BENCHMARK(BM_ScorerBackward)->Arg(128)->Arg(1024);
BENCHMARK(BM_AdamWStep);
