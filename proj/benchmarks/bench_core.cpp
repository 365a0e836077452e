#include <vector>

#include <benchmark/benchmark.h>

#include "ubf/forest.hpp"
#include "ubf/random.hpp"
#include "ubf/scar.hpp"
#include "ubf/selection.hpp"
#include "ubf/stats.hpp"
#include "ubf/synth.hpp"

namespace {

using namespace ubf;

SyntheticData data(std::size_t n, std::size_t dim) {
  GeneratorSpec spec;
  spec.n = n;
  spec.dim = dim;
  spec.seed = 1;
  return generate(spec);
}

void BM_ForestFit(benchmark::State& state) {
  const SyntheticData d = data(static_cast<std::size_t>(state.range(0)), 5);
  const std::vector<double> w(d.y_true.size(), 1.0);
  ForestParams p;
  p.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(TreeEnsemble::fit(d.x, d.y_true, w, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const SyntheticData d = data(5000, 5);
  const std::vector<double> w(d.y_true.size(), 1.0);
  ForestParams p;
  const TreeEnsemble f = TreeEnsemble::fit(d.x, d.y_true, w, p);
  for (auto _ : state) benchmark::DoNotOptimize(f.predict_proba(d.x));
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMillisecond);

void BM_SpearmanMatrix(benchmark::State& state) {
  const SyntheticData d = data(static_cast<std::size_t>(state.range(0)), 33);
  for (auto _ : state) benchmark::DoNotOptimize(spearman_matrix(d.x));
}
BENCHMARK(BM_SpearmanMatrix)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  Rng r(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = r.uniform();
    y[i] = r.bernoulli(0.3);
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocAuc)->Arg(10000)->Arg(100000);

void BM_ScarTest(benchmark::State& state) {
  const SyntheticData d = data(600, 2);
  Matrix p, u;
  for (std::size_t i = 0; i < d.s.size(); ++i) (d.s[i] ? p : u).append_row(d.x.row(i));
  ScarParams params;
  params.bootstrap = static_cast<std::size_t>(state.range(0));
  params.pi_hat = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(scar_test(p, u, params));
}
BENCHMARK(BM_ScarTest)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
