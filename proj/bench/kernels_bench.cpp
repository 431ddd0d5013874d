#include <benchmark/benchmark.h>

#include <random>

#include "compalign/kernels/kernels.hpp"

namespace {

using compalign::BoundingBox;
using compalign::EmbeddingVector;
namespace kernels = compalign::kernels;

std::vector<EmbeddingVector> random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<EmbeddingVector> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = dist(rng);
    rows.emplace_back(std::move(v));
  }
  return rows;
}

template <auto Fn>
void BM_BatchCosine(benchmark::State& state) {
  const auto rows = random_rows(static_cast<std::size_t>(state.range(0)), 512, 1);
  const auto query = random_rows(1, 512, 2).front();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(rows, query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchCosine<kernels::serial::batch_cosine>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_BatchCosine<kernels::omp::batch_cosine>)->Arg(1000)->Arg(20000);

template <auto Fn>
void BM_UnionMask(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(side) * side * 3, 200);
  const std::vector<BoundingBox> boxes{{side / 8, side / 8, side / 3, side / 2},
                                       {side / 2, side / 3, side / 3, side / 3}};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(rgb, side, side, boxes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(rgb.size()));
}
BENCHMARK(BM_UnionMask<kernels::serial::union_mask>)->Arg(256)->Arg(2048);
BENCHMARK(BM_UnionMask<kernels::omp::union_mask>)->Arg(256)->Arg(2048);

template <auto Fn>
void BM_WeightedSum(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto base = random_rows(1, dim, 3).front();
  const auto terms = random_rows(3, dim, 4);
  const std::vector<double> weights{0.3, -0.2, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(base, weights, terms));
}
BENCHMARK(BM_WeightedSum<kernels::serial::weighted_sum>)->Arg(512)->Arg(1 << 18);
BENCHMARK(BM_WeightedSum<kernels::omp::weighted_sum>)->Arg(512)->Arg(1 << 18);

}  // namespace

BENCHMARK_MAIN();
