#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "siftcad/sifting.hpp"

using namespace siftcad;
using std::numbers::pi;

TEST_CASE("rasterize_lse") {
  CHECK(rasterize_lse(1.0, 0.3) == StructuringElement{{0, 0}});
  CHECK(rasterize_lse(5.0, 0.0) == StructuringElement{{-2, 0}, {-1, 0}, {0, 0}, {1, 0}, {2, 0}});
  CHECK(rasterize_lse(5.0, pi / 2) == StructuringElement{{0, -2}, {0, -1}, {0, 0}, {0, 1}, {0, 2}});
  CHECK(rasterize_lse(4.0, 0.0).size() == 5);
  CHECK(rasterize_lse(5.714, 0.0).size() == 7);
  CHECK(rasterize_lse(3.0, pi / 4) == StructuringElement{{-1, -1}, {0, 0}, {1, 1}});
  CHECK_THROWS_AS(rasterize_lse(0.5, 0.0), InvalidArgument);
  for (int n = 0; n < 20; ++n) {
    const double th = n * pi / 20;
    for (double m : {3.0, 7.5, 22.5}) {
      const auto a = rasterize_lse(m, th);
      CHECK(a == rasterize_lse(m, th + pi));
      // Point symmetric, contains the origin.
      for (const auto& o : a) CHECK(std::find(a.begin(), a.end(), Offset2D{-o.dx, -o.dy}) != a.end());
      CHECK(std::find(a.begin(), a.end(), Offset2D{0, 0}) != a.end());
    }
  }
}

TEST_CASE("erosion and dilation basics") {
  const Image2D c(7, 5, 4.0);
  const auto se = rasterize_lse(3.0, 0.0);
  CHECK(gray_erode(c, se) == c);
  CHECK(gray_dilate(c, se) == c);

  Image2D dot(7, 5, 0.0);
  dot.at(3, 2) = 9.0;
  CHECK(gray_erode(dot, se) == Image2D(7, 5, 0.0));
  const Image2D d = gray_dilate(dot, se);
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 7; ++x) CHECK(d.at(x, y) == ((y == 2 && x >= 2 && x <= 4) ? 9.0 : 0.0));
  CHECK_THROWS_AS(gray_erode(c, StructuringElement{}), InvalidArgument);
}

TEST_CASE("fast erosion/dilation equal the naive oracle") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    const Image2D f = oracle::random_image(rng, 16, 16);
    const double m = 1.0 + static_cast<double>(rng() % 200) / 10.0;
    const double th = static_cast<double>(rng() % 1000) / 1000.0 * pi;
    const auto se = rasterize_lse(m, th);
    CHECK(gray_erode(f, se) == oracle::erode(f, se));
    CHECK(gray_dilate(f, se) == oracle::dilate(f, se));
  }
  // Non-square slices and a general SE with gaps.
  const Image2D g = oracle::random_image(rng, 11, 23);
  const StructuringElement odd{{0, 0}, {2, 0}, {3, 1}, {-1, -2}, {-1, -3}, {5, 5}};
  CHECK(gray_erode(g, odd) == oracle::erode(g, odd));
  CHECK(gray_dilate(g, odd) == oracle::dilate(g, odd));
}

TEST_CASE("opening laws") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Image2D f = oracle::random_image(rng, 20, 13);
    const auto se = rasterize_lse(2.0 + trial, trial * pi / 7);
    const Image2D o = gray_open(f, se);
    const Image2D e = gray_erode(f, se), d = gray_dilate(f, se);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      CHECK(o.data[i] <= f.data[i]);
      CHECK(e.data[i] <= f.data[i]);
      CHECK(f.data[i] <= d.data[i]);
    }
    CHECK(gray_open(o, se) == o);
  }
}

TEST_CASE("opening keeps long ridges, removes small dots") {
  Image2D f(21, 9, 0.0);
  for (std::size_t x = 2; x < 19; ++x) f.at(x, 4) = 10.0;
  f.at(10, 1) = 10.0;
  const Image2D o = gray_open(f, rasterize_lse(7.0, 0.0));
  for (std::size_t x = 2; x < 19; ++x) CHECK(o.at(x, 4) == 10.0);
  CHECK(o.at(10, 1) == 0.0);
}

TEST_CASE("ms2d") {
  CHECK(ms2d(Image2D(12, 12, 7.0), 3, 9, 4) == Image2D(12, 12, 0.0));
  std::mt19937_64 rng(22);
  for (int N : {1, 2, 4}) {
    const Image2D f = oracle::random_image(rng, 16, 16);
    const Image2D r = ms2d(f, 3.0, 9.0, N);
    CHECK(r == oracle::ms2d(f, 3.0, 9.0, N));
    for (double v : r.data) CHECK(v >= 0.0);
  }
  CHECK_THROWS_AS(ms2d(Image2D(4, 4), 5, 5, 2), InvalidArgument);
  CHECK_THROWS_AS(ms2d(Image2D(4, 4), 3, 5, 0), InvalidArgument);

  // Disc between the two sizes responds, a band wider than ML2 does not.
  Image2D disc(41, 41, 0.0);
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x)
      if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= 16) disc.at(x, y) = 100.0;
  const Image2D rd = ms2d(disc, 3.0, 15.0, 8);
  CHECK(rd.at(20, 20) > 0.0);
  Image2D band(61, 61, 0.0);
  for (int y = 10; y < 51; ++y)
    for (int x = 0; x < 61; ++x) band.at(x, y) = 100.0;
  const Image2D rb = ms2d(band, 3.0, 15.0, 8);
  CHECK(rb.at(30, 30) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lse_magnitudes") {
  const double vmin = sphere_volume(4.0), vmax = sphere_volume(63.0);
  CHECK(vmin == doctest::Approx(33.5103).epsilon(1e-5));
  CHECK(vmax == doctest::Approx(130924.0).epsilon(1e-5));
  const MagnitudePlan p = lse_magnitudes(vmin, vmax, 0.7, 1.3, 3);
  CHECK(p.ml1_mm == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(p.ml2_mm == doctest::Approx(15.75).epsilon(1e-12));
  CHECK(std::abs(p.axial.ml1 - 4.0 / 0.7) < 1e-9);
  CHECK(std::abs(p.axial.ml2 - 22.5) < 1e-9);
  CHECK(std::abs(p.sagittal.ml1 - 4.0 / 1.3) < 1e-9);
  CHECK(std::abs(p.coronal.ml2 - 22.5) < 1e-9);
  const MagnitudePlan iso = lse_magnitudes(vmin, vmax, 1.0, 1.0, 3);
  CHECK(iso.axial.ml1 == iso.sagittal.ml1);
  CHECK(iso.axial.ml2 == iso.coronal.ml2);
  CHECK_THROWS_AS(lse_magnitudes(10, 5, 1, 1, 3), InvalidArgument);
  CHECK_THROWS_AS(lse_magnitudes(1, 5, 1, 1, 0), InvalidArgument);
}

TEST_CASE("ms3d") {
  const MagnitudePlan plan = lse_magnitudes(sphere_volume(2.0), sphere_volume(24.0), 1.0, 1.0, 2);
  CHECK(ms3d(Volume3D({10, 10, 10}, {}, 5.0), plan, 4) == Volume3D({10, 10, 10}, {}, 0.0));
  std::mt19937_64 rng(12);
  const Volume3D f = oracle::random_volume(rng, {12, 12, 12});
  const Volume3D fast = ms3d(f, plan, 2);
  CHECK(fast == oracle::ms3d(f, plan, 2));
  for (double v : fast.storage()) CHECK(v >= 0.0);

  // A ball inside the passband dominates the response.
  Volume3D ball({32, 32, 32}, {}, 10.0);
  BinaryMask inside(ball.dims(), {}, 0);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto c = ball.coords(i);
    const double dx = c[0] - 15.5, dy = c[1] - 15.5, dz = c[2] - 15.5;
    if (dx * dx + dy * dy + dz * dz <= 16.0) {
      ball[i] = 110.0;
      inside[i] = 1;
    }
  }
  const Volume3D r = ms3d(ball, plan, 6);
  double in = 0, out = 0;
  std::size_t nin = 0, nout = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (inside[i]) {
      in += r[i];
      ++nin;
    } else {
      out += r[i];
      ++nout;
    }
  }
  CHECK(in / nin >= 5.0 * (out / nout + 1e-12));
}

TEST_CASE("normalize16") {
  Volume3D v({4, 1, 1}, {});
  v[0] = 2;
  v[1] = 4;
  v[2] = 6;
  v[3] = 100;
  BinaryMask m(v.dims(), {}, 1);
  m[3] = 0;
  const Volume3D n = normalize16(v, m);
  CHECK(n[0] == 0.0);
  CHECK(n[1] == 32767.5);
  CHECK(n[2] == 65535.0);
  CHECK(n[3] == 0.0);
  CHECK(normalize16(Volume3D(v.dims(), {}, 3.0), m) == Volume3D(v.dims(), {}, 0.0));
  CHECK_THROWS_AS(normalize16(v, BinaryMask(v.dims(), {}, 0)), DegenerateInput);
}
