#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "siftcad/threshold.hpp"

using namespace siftcad;

namespace {
// Index maximizing between-class variance, by scanning all cuts.
std::size_t exhaustive_otsu_index(const std::vector<double>& h) { return oracle::exhaustive_otsu(h, 1)[0]; }
}  // namespace

TEST_CASE("otsu separates two deltas") {
  Volume3D v({1000, 1, 1}, {});
  for (std::size_t i = 0; i < 1000; ++i) v[i] = i < 500 ? 0.0 : 200.0;
  const double th = otsu_threshold(v);
  CHECK(th > 0.0);
  CHECK(th <= 200.0);
  const BinaryMask b = binarize(v, th);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(b[i] == (i >= 500));
  const Histogram h = masked_histogram(v, nullptr);
  CHECK(otsu_index(h.counts) == exhaustive_otsu_index(h.counts));
}

TEST_CASE("otsu on a seeded Gaussian mixture matches the exhaustive scan") {
  std::mt19937_64 rng(1979);
  std::normal_distribution<double> a(50.0, 10.0), b(200.0, 10.0);
  Volume3D v({20000, 1, 1}, {});
  for (std::size_t i = 0; i < 10000; ++i) v[i] = a(rng);
  for (std::size_t i = 10000; i < 20000; ++i) v[i] = b(rng);
  const double th = otsu_threshold(v);
  CHECK(th >= 90.0);
  CHECK(th <= 160.0);
  const Histogram h = masked_histogram(v, nullptr);
  CHECK(otsu_index(h.counts) == exhaustive_otsu_index(h.counts));
}

TEST_CASE("otsu rejects constant input and honours the mask") {
  CHECK_THROWS_AS(otsu_threshold(Volume3D({4, 4, 4}, {}, 3.0)), DegenerateInput);
  Volume3D v({4, 1, 1}, {});
  v[0] = 0;
  v[1] = 10;
  v[2] = 20;
  v[3] = 1000;
  BinaryMask m(v.dims(), {}, 1);
  m[3] = 0;
  const double th = otsu_threshold(v, m);
  CHECK(th > 0.0);
  CHECK(th <= 20.0);
}

TEST_CASE("multilevel otsu with T = 1 equals otsu") {
  std::mt19937_64 rng(4);
  const Volume3D v = oracle::random_volume(rng, {10, 10, 10});
  const BinaryMask all(v.dims(), v.spacing(), 1);
  const ThresholdSet ts = multilevel_otsu(v, all, 1);
  REQUIRE(ts.values.size() == 1);
  CHECK(ts.values[0] == otsu_threshold(v));
}

TEST_CASE("multilevel otsu on three deltas") {
  Volume3D v({300, 1, 1}, {});
  for (std::size_t i = 0; i < 300; ++i) v[i] = i < 100 ? 10.0 : i < 200 ? 100.0 : 200.0;
  const BinaryMask all(v.dims(), v.spacing(), 1);
  const ThresholdSet ts = multilevel_otsu(v, all, 2);
  REQUIRE(ts.values.size() == 2);
  CHECK(ts.values[0] > 10.0);
  CHECK(ts.values[0] <= 100.0);
  CHECK(ts.values[1] > 100.0);
  CHECK(ts.values[1] <= 200.0);
  CHECK(ts.bin_indices == oracle::exhaustive_otsu(ts.histogram.counts, 2));
}

TEST_CASE("multilevel otsu equals exhaustive search on random 64-bin histograms") {
  std::mt19937_64 rng(64);
  std::uniform_int_distribution<int> u(1, 1000);
  for (std::size_t T = 1; T <= 3; ++T) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> h(64);
      for (double& c : h) c = u(rng);
      CHECK(multilevel_otsu_indices(h, T) == oracle::exhaustive_otsu(h, T));
    }
  }
}

TEST_CASE("multilevel otsu needs T+1 distinct values; T = 16 is increasing") {
  Volume3D v({3, 1, 1}, {});
  v[0] = 1;
  v[1] = 2;
  v[2] = 3;
  const BinaryMask all(v.dims(), v.spacing(), 1);
  CHECK_THROWS_AS(multilevel_otsu(v, all, 3), DegenerateInput);
  CHECK_NOTHROW(multilevel_otsu(v, all, 2));

  std::mt19937_64 rng(16);
  const Volume3D r = oracle::random_volume(rng, {16, 16, 16});
  const ThresholdSet ts = multilevel_otsu(r, BinaryMask(r.dims(), r.spacing(), 1), 16);
  REQUIRE(ts.values.size() == 16);
  for (std::size_t i = 1; i < 16; ++i) CHECK(ts.values[i] > ts.values[i - 1]);
}

TEST_CASE("binarize bounds and nesting") {
  std::mt19937_64 rng(9);
  const Volume3D v = oracle::random_volume(rng, {6, 6, 6});
  double lo = 1e300, hi = -1e300;
  for (double x : v.storage()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(count(binarize(v, lo)) == v.size());
  CHECK(count(binarize(v, hi + 1.0)) == 0);
  const BinaryMask a = binarize(v, 80.0), b = binarize(v, 160.0);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK((!b[i] || a[i]));
}
