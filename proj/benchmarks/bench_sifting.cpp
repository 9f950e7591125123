#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "siftcad/morphology.hpp"
#include "siftcad/sifting.hpp"
#include "siftcad/threshold.hpp"
#include "siftcad/wavelet.hpp"

using namespace siftcad;

namespace {

Image2D noise_slice(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image2D f(w, h);
  for (auto& x : f.data) x = u(rng);
  return f;
}

Volume3D noise_volume(Dims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Volume3D v(d, Spacing{0.7, 0.7, 2.0}, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(rng);
  return v;
}

void BM_LineOpen(benchmark::State& state) {
  const Image2D f = noise_slice(256, 256, 1);
  const auto se = rasterize_lse(static_cast<double>(state.range(0)), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(gray_open(f, se));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}
BENCHMARK(BM_LineOpen)->Arg(5)->Arg(23)->Arg(65)->Unit(benchmark::kMicrosecond);

void BM_Ms2d(benchmark::State& state) {
  const Image2D f = noise_slice(256, 256, 2);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ms2d(f, 5.7, 22.5, N));
}
BENCHMARK(BM_Ms2d)->Arg(1)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Ms3d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume3D v = noise_volume({n, n, n / 2}, 3);
  const auto plan = lse_magnitudes(sphere_volume(4.0), sphere_volume(63.0), 0.7, 2.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ms3d(v, plan, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_Ms3d)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kSecond)->Iterations(1);

void BM_Dwt3RoundTrip(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume3D v = noise_volume({n, n, n / 2}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(idwt3_db2(dwt3_db2(v)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_Dwt3RoundTrip)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MultilevelOtsu(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  std::vector<double> h(256);
  for (auto& x : h) x = u(rng);
  const auto levels = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multilevel_otsu_indices(h, levels));
}
BENCHMARK(BM_MultilevelOtsu)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
