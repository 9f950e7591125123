#include "siftcad/sifting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "siftcad/parallel.hpp"

namespace siftcad {
namespace {

void check_ms_args(double ml1, double ml2, int N) {
  if (N < 1) throw InvalidArgument("sifting: N must be >= 1");
  if (!(ml1 >= 1.0)) throw InvalidArgument("sifting: ML1 must be >= 1 pixel");
  if (!(ml1 < ml2)) throw InvalidArgument("sifting: ML1 must be smaller than ML2");
}

// Per-orientation filters for a fixed (ml1, ml2, N).
class Sifter {
 public:
  Sifter(double ml1, double ml2, int N) {
    check_ms_args(ml1, ml2, N);
    for (int n = 0; n < N; ++n) {
      const double theta = static_cast<double>(n) * std::numbers::pi / static_cast<double>(N);
      shorts_.emplace_back(rasterize_lse(ml1, theta));
      longs_.emplace_back(rasterize_lse(ml2, theta));
    }
  }

  void run(const Image2D& f, Image2D& acc) const {
    acc = Image2D(f.width, f.height, 0.0);
    Image2D opened, tophat, term;
    for (std::size_t n = 0; n < shorts_.size(); ++n) {
      longs_[n].open(f, opened);
      tophat.width = f.width;
      tophat.height = f.height;
      tophat.data.resize(f.data.size());
      for (std::size_t i = 0; i < f.data.size(); ++i) tophat.data[i] = f.data[i] - opened.data[i];
      shorts_[n].open(tophat, term);
      for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += term.data[i];
    }
  }

 private:
  std::vector<LineFilter> shorts_;
  std::vector<LineFilter> longs_;
};

// ms2d on every z slice of v (x,y planes).
Volume3D sift_slices(const Volume3D& v, const Sifter& sifter) {
  const Dims d = v.dims();
  Volume3D out(d, v.spacing());
  const std::size_t plane = d.nx * d.ny;
  parallel_for(d.nz, [&](std::size_t z) {
    Image2D slice(d.nx, d.ny);
    std::copy(v.data().begin() + static_cast<std::ptrdiff_t>(z * plane),
              v.data().begin() + static_cast<std::ptrdiff_t>((z + 1) * plane), slice.data.begin());
    Image2D res;
    sifter.run(slice, res);
    std::copy(res.data.begin(), res.data.end(), out.data().begin() + static_cast<std::ptrdiff_t>(z * plane));
  });
  return out;
}

}  // namespace

double sphere_volume(double diameter_mm) { return std::numbers::pi / 6.0 * diameter_mm * diameter_mm * diameter_mm; }

MagnitudePlan lse_magnitudes(double v_min, double v_max, double d, double D, int M) {
  if (!(v_min > 0.0) || !(v_min < v_max)) throw InvalidArgument("lse_magnitudes: need 0 < V_min < V_max");
  if (!(d > 0.0) || !(D > 0.0)) throw InvalidArgument("lse_magnitudes: spacings must be positive");
  if (M < 1) throw InvalidArgument("lse_magnitudes: M must be >= 1");
  MagnitudePlan p;
  p.v_min = v_min;
  p.v_max = v_max;
  p.scales = M;
  p.ml1_mm = std::cbrt(6.0 * v_min / std::numbers::pi);
  p.ml2_mm = std::cbrt(6.0 * v_max / std::numbers::pi) / std::ldexp(1.0, M - 1);
  p.axial = {p.ml1_mm / d, p.ml2_mm / d};
  const MagnitudePair oblique{std::min(p.ml1_mm / d, p.ml1_mm / D), p.ml2_mm / d};
  p.sagittal = oblique;
  p.coronal = oblique;
  return p;
}

Image2D ms2d(const Image2D& f, double ml1, double ml2, int N) {
  if (f.empty()) throw InvalidArgument("ms2d: empty slice");
  Sifter s(ml1, ml2, N);
  Image2D out;
  s.run(f, out);
  return out;
}

Volume3D ms3d_view(const Volume3D& f, const MagnitudePair& pair, View view, int N) {
  if (f.empty()) throw InvalidArgument("ms3d: empty volume");
  const Sifter s(pair.ml1, pair.ml2, N);
  switch (view) {
    case View::Axial:
      return sift_slices(f, s);
    case View::Sagittal:
      return permute(sift_slices(permute(f, {1, 3, 2}), s), {1, 3, 2});
    case View::Coronal:
      return permute(sift_slices(permute(f, {3, 2, 1}), s), {3, 2, 1});
  }
  throw InvalidArgument("ms3d: unknown view");
}

Volume3D ms3d(const Volume3D& f, const MagnitudePlan& plan, int N) {
  Volume3D out = ms3d_view(f, plan.axial, View::Axial, N);
  {
    const Volume3D sag = ms3d_view(f, plan.sagittal, View::Sagittal, N);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sag[i];
  }
  const Volume3D cor = ms3d_view(f, plan.coronal, View::Coronal, N);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += cor[i];
  return out;
}

Volume3D normalize16(const Volume3D& f, const BinaryMask& mask) {
  require_same_geometry(f, mask, "normalize16");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask[i]) continue;
    lo = std::min(lo, f[i]);
    hi = std::max(hi, f[i]);
    ++n;
  }
  if (n == 0) throw DegenerateInput("normalize16: empty mask");
  Volume3D out(f.dims(), f.spacing(), 0.0);
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i]) out[i] = (f[i] - lo) / range * 65535.0;
  }
  return out;
}

}  // namespace siftcad
