#include <benchmark/benchmark.h>

#include <cmath>

#include <gridlab/diagnostics.hpp>
#include <gridlab/diophantine.hpp>
#include <gridlab/group.hpp>
#include <gridlab/lattice.hpp>
#include <gridlab/rng.hpp>
#include <gridlab/walk.hpp>

using namespace gridlab;

namespace {

Matrix skewed_basis(int d, Rng& rng) {
  Matrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
  g /= std::pow(std::abs(g.determinant()), 1.0 / d);
  if (g.determinant() < 0) g.col(0) = -g.col(0);
  for (int k = 1; k < d; ++k) g.col(k) += 7.0 * g.col(k - 1);
  return g;
}

void BM_ReduceBasis(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(1, 0);
  const auto basis = LatticeBasis::from_columns(skewed_basis(d, rng));
  for (auto _ : state) benchmark::DoNotOptimize(reduce_basis(basis));
}
BENCHMARK(BM_ReduceBasis)->DenseRange(2, 6, 2);

void BM_ShortestVector(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(2, 0);
  const auto basis = reduce_basis(LatticeBasis::from_columns(skewed_basis(d, rng)));
  for (auto _ : state) benchmark::DoNotOptimize(shortest_vector(basis));
}
BENCHMARK(BM_ShortestVector)->DenseRange(2, 6, 2);

void BM_ShortestAffineVector(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(3, 0);
  Vector s(d);
  for (int i = 0; i < d; ++i) s(i) = rng.uniform(-2, 2);
  const AffinePoint x{reduce_basis(LatticeBasis::from_columns(skewed_basis(d, rng))), s};
  for (auto _ : state) benchmark::DoNotOptimize(shortest_affine_vector(x));
}
BENCHMARK(BM_ShortestAffineVector)->DenseRange(2, 6, 2);

void BM_SiegelTransform(benchmark::State& state) {
  Rng rng(4, 0);
  const auto basis = sample_haar_lattice(2, rng);
  const double r = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(siegel_transform(r, basis));
}
BENCHMARK(BM_SiegelTransform)->Arg(1)->Arg(4)->Arg(16);

void BM_FlowStep(benchmark::State& state) {
  const FlowParams p(1, 1);
  AffinePoint x = make_point(Matrix::Constant(1, 1, 0.5772156649015329), Vector{{0.3}});
  for (auto _ : state) {
    x = canonicalize(flow_raw(p, 0.05, x));
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_FlowStep);

void BM_BirkhoffSiegel(benchmark::State& state) {
  const auto x = make_point(Matrix::Constant(1, 1, 0.5772156649015329), Vector::Zero(1));
  const auto f = TestFunction::siegel(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(birkhoff_average(x, FlowParams(1, 1), 100.0, 0.05, f));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_BirkhoffSiegel);

void BM_BadScan(benchmark::State& state) {
  const AffineForm form(Matrix::Constant(1, 1, 0.6180339887498949), Vector{{0.25}});
  for (auto _ : state) benchmark::DoNotOptimize(bad_scan(form, state.range(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BadScan)->Arg(1000)->Arg(100000);

void BM_WalkProduct(benchmark::State& state) {
  const VectorIFS ifs({VectorSimilarity::scalar(0.5, 0.1), VectorSimilarity::scalar(1.0 / 3, 0.6)},
                      {0.5, 0.5});
  const auto cfg = WalkConfig::from_ifs(ifs, FlowParams(1, 1));
  CodingWord w;
  for (int i = 0; i < 30; ++i) w.letters.push_back(static_cast<std::uint32_t>(i % 2));
  for (auto _ : state) benchmark::DoNotOptimize(walk_product(cfg, w));
}
BENCHMARK(BM_WalkProduct);

}  // namespace
BENCHMARK_MAIN();
