// Parallel kernels against their serial twins.

#include <benchmark/benchmark.h>

#include "imvc/dtree.hpp"
#include "imvc/kernels.hpp"
#include "imvc/random.hpp"
#include "imvc/tao.hpp"

using namespace imvc;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = 2.0 * unit_uniform(rng) - 1.0;
  return m;
}

std::vector<dtree::Label> random_labels(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<dtree::Label> y(n);
  for (auto& l : y) l = static_cast<dtree::Label>(unit_uniform(rng) * k) % k;
  return y;
}

void BM_Matmul(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix a = random_matrix(n, 128, 1), b = random_matrix(128, 64, 2);
  Matrix out(n, 64);
  for (auto _ : s) {
    kernels::matmul(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}
void BM_MatmulSerial(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix a = random_matrix(n, 128, 1), b = random_matrix(128, 64, 2);
  Matrix out(n, 64);
  for (auto _ : s) {
    kernels::serial::matmul(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_NearestCenter(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix z = random_matrix(n, 192, 3), c = random_matrix(10, 192, 4);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::nearest_center(z, c));
}
void BM_NearestCenterSerial(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix z = random_matrix(n, 192, 3), c = random_matrix(10, 192, 4);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::serial::nearest_center(z, c));
}

void BM_BestSplit(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix x = random_matrix(n, 30, 5);
  const auto y = random_labels(n, 5, 6);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (auto _ : s) benchmark::DoNotOptimize(dtree::best_split(x, y, all, 5));
}
void BM_BestSplitSerial(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix x = random_matrix(n, 30, 5);
  const auto y = random_labels(n, 5, 6);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (auto _ : s) benchmark::DoNotOptimize(dtree::serial::best_split(x, y, all, 5));
}

void BM_OptimizeTree(benchmark::State& s) {
  const auto n = static_cast<std::size_t>(s.range(0));
  const Matrix x = random_matrix(n, 30, 7);
  const auto grow = random_labels(n, 5, 8), target = random_labels(n, 5, 9);
  const auto tree = dtree::build_tree(x, grow, 5);
  for (auto _ : s) {
    auto t = tree;
    benchmark::DoNotOptimize(tao::optimize_tree(t, x, target));
  }
}

}  // namespace

BENCHMARK(BM_Matmul)->Arg(600)->Arg(4000);
BENCHMARK(BM_MatmulSerial)->Arg(600)->Arg(4000);
BENCHMARK(BM_NearestCenter)->Arg(600)->Arg(4000);
BENCHMARK(BM_NearestCenterSerial)->Arg(600)->Arg(4000);
BENCHMARK(BM_BestSplit)->Arg(600)->Arg(4000);
BENCHMARK(BM_BestSplitSerial)->Arg(600)->Arg(4000);
BENCHMARK(BM_OptimizeTree)->Arg(600)->Arg(2000);

BENCHMARK_MAIN();
