#include <benchmark/benchmark.h>

#include "mmd/corrnet.hpp"
#include "mmd/kernels.hpp"
#include "mmd/rng.hpp"

namespace {

mmd::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  mmd::SeededRng rng(seed);
  mmd::Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

mmd::Vector random_vector(std::size_t n, std::uint64_t seed) {
  mmd::SeededRng rng(seed);
  mmd::Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Encoder shape: k x 4096.
template <void (*Gemv)(const mmd::Matrix&, std::span<const double>, std::span<double>)>
void BM_gemv(benchmark::State& state) {
  const auto a = random_matrix(static_cast<std::size_t>(state.range(0)), mmd::kImageDim, 1);
  const auto x = random_vector(mmd::kImageDim, 2);
  mmd::Vector y(a.rows());
  for (auto _ : state) {
    Gemv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

// Decoder gradient shape: 4096 x k.
template <void (*Rank1)(mmd::Matrix&, double, std::span<const double>, std::span<const double>)>
void BM_rank1(benchmark::State& state) {
  auto a = random_matrix(mmd::kImageDim, static_cast<std::size_t>(state.range(0)), 3);
  const auto x = random_vector(mmd::kImageDim, 4);
  const auto y = random_vector(a.cols(), 5);
  for (auto _ : state) {
    Rank1(a, 1e-6, x, y);
    benchmark::ClobberMemory();
  }
}

template <void (*Pairwise)(const mmd::Matrix&, std::span<double>)>
void BM_pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_matrix(n, mmd::kImageDim, 6);
  mmd::Vector out(mmd::kernels::condensed_size(n));
  for (auto _ : state) {
    Pairwise(pts, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_gemv<mmd::kernels::serial::gemv>)->Name("gemv/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_gemv<mmd::kernels::omp::gemv>)->Name("gemv/omp")->Arg(32)->Arg(128);
BENCHMARK(BM_rank1<mmd::kernels::serial::rank1_update>)->Name("rank1/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_rank1<mmd::kernels::omp::rank1_update>)->Name("rank1/omp")->Arg(32)->Arg(128);
BENCHMARK(BM_pairwise<mmd::kernels::serial::pairwise_squared_distances>)->Name("pairwise/serial")->Arg(300);
BENCHMARK(BM_pairwise<mmd::kernels::omp::pairwise_squared_distances>)->Name("pairwise/omp")->Arg(300);

BENCHMARK_MAIN();
