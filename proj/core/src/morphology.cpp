#include "siftcad/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace siftcad {
namespace {

// k*t can land a few ulps off a .5 boundary depending on how theta was
// reduced; snapping first makes theta and theta + pi agree.
int round_minor(double v) {
  const double snapped = std::round(v * 1e9) / 1e9;
  return static_cast<int>(std::round(snapped));
}

void require_origin(std::span<const Offset2D> se) {
  if (se.empty()) throw InvalidArgument("structuring element is empty");
  if (std::find(se.begin(), se.end(), Offset2D{0, 0}) == se.end()) {
    throw InvalidArgument("structuring element must contain the origin");
  }
}

void transpose(const double* src, std::size_t w, std::size_t h, double* dst) {
  constexpr std::size_t B = 32;
  for (std::size_t y0 = 0; y0 < h; y0 += B) {
    for (std::size_t x0 = 0; x0 < w; x0 += B) {
      const std::size_t y1 = std::min(h, y0 + B), x1 = std::min(w, x0 + B);
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) dst[y + h * x] = src[x + w * y];
      }
    }
  }
}

struct MinOp {
  static constexpr double pad = std::numeric_limits<double>::infinity();
  static double apply(double a, double b) { return b < a ? b : a; }
};

struct MaxOp {
  static constexpr double pad = -std::numeric_limits<double>::infinity();
  static double apply(double a, double b) { return b > a ? b : a; }
};

struct Scratch {
  std::vector<double> padded, fwd, bwd, table, in_t, out_t;
};

thread_local Scratch scratch;

// Windowed extremum of every length-`wd` window of each row, with rows
// padded by wd-1 neutral samples on both sides (van Herk / Gil-Werman).
// table[y * stride + s] covers row samples [s - (wd-1), s].
template <typename Op>
void window_table(const double* src, std::size_t w, std::size_t h, std::size_t wd, std::vector<double>& table) {
  const std::size_t L = w + 2 * (wd - 1);
  const std::size_t stride = w + wd - 1;
  table.resize(h * stride);
  auto& g = scratch.padded;
  auto& F = scratch.fwd;
  auto& Bk = scratch.bwd;
  g.assign(L, Op::pad);
  F.resize(L);
  Bk.resize(L);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy(src + y * w, src + (y + 1) * w, g.begin() + static_cast<std::ptrdiff_t>(wd - 1));
    double* row = table.data() + y * stride;
    if (wd == 1) {
      std::copy(src + y * w, src + (y + 1) * w, row);
      continue;
    }
    for (std::size_t i = 0; i < L; ++i) F[i] = (i % wd == 0) ? g[i] : Op::apply(F[i - 1], g[i]);
    for (std::size_t i = L; i-- > 0;) {
      Bk[i] = (i % wd == wd - 1 || i == L - 1) ? g[i] : Op::apply(Bk[i + 1], g[i]);
    }
    for (std::size_t s = 0; s < stride; ++s) row[s] = Op::apply(Bk[s], F[s + wd - 1]);
  }
}

}  // namespace

StructuringElement rasterize_lse(double magnitude, double theta) {
  if (!(magnitude >= 1.0) || !std::isfinite(magnitude)) throw InvalidArgument("LSE magnitude must be >= 1");
  if (!std::isfinite(theta)) throw InvalidArgument("LSE orientation must be finite");
  auto n = static_cast<long>(std::ceil(magnitude));
  if (n % 2 == 0) ++n;
  const long r = (n - 1) / 2;
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  const double c = std::cos(t), s = std::sin(t);
  StructuringElement se;
  se.reserve(static_cast<std::size_t>(n));
  if (std::abs(c) >= std::abs(s)) {
    const double slope = s / c;
    for (long k = -r; k <= r; ++k) se.push_back({static_cast<int>(k), round_minor(static_cast<double>(k) * slope)});
  } else {
    const double slope = c / s;
    for (long k = -r; k <= r; ++k) se.push_back({round_minor(static_cast<double>(k) * slope), static_cast<int>(k)});
  }
  std::sort(se.begin(), se.end());
  se.erase(std::unique(se.begin(), se.end()), se.end());
  return se;
}

LineFilter::LineFilter(std::span<const Offset2D> se) {
  require_origin(se);
  // Maximal contiguous runs along x grouped by dy, or along y grouped by dx.
  auto decompose = [&](bool along_y) {
    std::map<int, std::vector<int>> groups;
    for (const auto& o : se) {
      if (along_y) {
        groups[o.dx].push_back(o.dy);
      } else {
        groups[o.dy].push_back(o.dx);
      }
    }
    std::vector<Run> runs;
    for (auto& [cross, v] : groups) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      std::size_t i = 0;
      while (i < v.size()) {
        std::size_t j = i + 1;
        while (j < v.size() && v[j] == v[j - 1] + 1) ++j;
        runs.push_back({v[i], static_cast<int>(j - i), cross});
        i = j;
      }
    }
    return runs;
  };
  auto rows = decompose(false);
  auto cols = decompose(true);
  transposed_ = cols.size() < rows.size();
  runs_ = transposed_ ? std::move(cols) : std::move(rows);
  for (const auto& r : runs_) widths_.push_back(r.length);
  std::sort(widths_.begin(), widths_.end());
  widths_.erase(std::unique(widths_.begin(), widths_.end()), widths_.end());
}

void LineFilter::erode_rows(const double* src, std::size_t w, std::size_t h, double* dst, bool dilate) const {
  std::fill(dst, dst + w * h, dilate ? MaxOp::pad : MinOp::pad);
  const auto W = static_cast<long>(w);
  const auto H = static_cast<long>(h);
  auto& table = scratch.table;
  for (int wd : widths_) {
    if (dilate) {
      window_table<MaxOp>(src, w, h, static_cast<std::size_t>(wd), table);
    } else {
      window_table<MinOp>(src, w, h, static_cast<std::size_t>(wd), table);
    }
    const long stride = W + wd - 1;
    for (const auto& r : runs_) {
      if (r.length != wd) continue;
      // Dilation reads f(p - o): reflect the run through the origin.
      const long start = dilate ? -(r.start + r.length - 1) : r.start;
      const long cross = dilate ? -r.cross : r.cross;
      // Window for output x starts at x + start; table column = that + wd - 1.
      const long x_lo = std::max(0L, -(wd - 1) - start);
      const long x_hi = std::min(W - 1, W - 1 - start);
      if (x_lo > x_hi) continue;
      for (long y = 0; y < H; ++y) {
        const long ys = y + cross;
        if (ys < 0 || ys >= H) continue;
        const double* trow = table.data() + ys * stride + start + wd - 1;
        double* orow = dst + y * W;
        if (dilate) {
          for (long x = x_lo; x <= x_hi; ++x) orow[x] = MaxOp::apply(orow[x], trow[x]);
        } else {
          for (long x = x_lo; x <= x_hi; ++x) orow[x] = MinOp::apply(orow[x], trow[x]);
        }
      }
    }
  }
}

void LineFilter::apply(const Image2D& f, Image2D& out, bool dilate) const {
  if (f.empty()) throw InvalidArgument("morphology on an empty slice");
  out.width = f.width;
  out.height = f.height;
  out.data.resize(f.data.size());
  if (!transposed_) {
    erode_rows(f.data.data(), f.width, f.height, out.data.data(), dilate);
    return;
  }
  auto& in_t = scratch.in_t;
  auto& out_t = scratch.out_t;
  in_t.resize(f.data.size());
  out_t.resize(f.data.size());
  transpose(f.data.data(), f.width, f.height, in_t.data());
  erode_rows(in_t.data(), f.height, f.width, out_t.data(), dilate);
  transpose(out_t.data(), f.height, f.width, out.data.data());
}

void LineFilter::erode(const Image2D& f, Image2D& out) const { apply(f, out, false); }
void LineFilter::dilate(const Image2D& f, Image2D& out) const { apply(f, out, true); }

void LineFilter::open(const Image2D& f, Image2D& out) const {
  Image2D tmp;
  apply(f, tmp, false);
  apply(tmp, out, true);
}

Image2D gray_erode(const Image2D& f, std::span<const Offset2D> se) {
  Image2D out;
  LineFilter(se).erode(f, out);
  return out;
}

Image2D gray_dilate(const Image2D& f, std::span<const Offset2D> se) {
  Image2D out;
  LineFilter(se).dilate(f, out);
  return out;
}

Image2D gray_open(const Image2D& f, std::span<const Offset2D> se) {
  Image2D out;
  LineFilter(se).open(f, out);
  return out;
}

}  // namespace siftcad
