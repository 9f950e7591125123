#include "siftcad/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <numbers>
#include <random>
#include <unordered_set>

#include "siftcad/parallel.hpp"
#include "siftcad/wavelet.hpp"

namespace siftcad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher lower envelope of parabolas; sample step s,
// parabola vertices at (q + shift) * s, queries at q * s.
void edt_1d(double* d, std::size_t n, std::size_t stride, double s, double shift, std::vector<std::size_t>& v,
            std::vector<double>& z, std::vector<double>& tmp) {
  tmp.resize(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = d[i * stride];
  v.resize(n);
  z.resize(n + 1);
  const double s2 = s * s;
  std::ptrdiff_t k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (tmp[q] == kInf) continue;
    const double xq = static_cast<double>(q) + shift;
    const double fq = tmp[q] + s2 * xq * xq;
    double cut = -kInf;
    while (k >= 0) {
      const std::size_t p = v[static_cast<std::size_t>(k)];
      const double xp = static_cast<double>(p) + shift;
      cut = (fq - (tmp[p] + s2 * xp * xp)) / (2.0 * s2 * (xq - xp));
      if (cut > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = k == 0 ? -kInf : cut;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) return;  // no finite input: the line stays at +inf
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[j + 1] < static_cast<double>(q)) ++j;
    const double dq = static_cast<double>(q) - (static_cast<double>(v[j]) + shift);
    d[q * stride] = s2 * dq * dq + tmp[v[j]];
  }
}

void edt_pass(std::vector<double>& d, Dims dims, std::size_t axis, double s, double shift) {
  std::vector<std::size_t> v;
  std::vector<double> z, tmp;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? dims.nx : dims.nx * dims.ny;
  const std::size_t n = dims[axis];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t pos = (i / stride) % n;
    if (pos != 0) continue;
    edt_1d(d.data() + i, n, stride, s, shift, v, z, tmp);
  }
}

void edt_all(std::vector<double>& d, Dims dims, Spacing s, std::size_t first, double shift) {
  edt_pass(d, dims, first, s[first], shift);
  for (std::size_t a = 0; a < 3; ++a) {
    if (a != first) edt_pass(d, dims, a, s[a], 0.0);
  }
}

// Local dense copy of a region's neighbourhood.
struct Box {
  std::array<std::size_t, 3> lo{}, ext{};
  std::vector<std::uint8_t> in;

  Dims dims() const { return {ext[0], ext[1], ext[2]}; }
  std::size_t local(std::size_t x, std::size_t y, std::size_t z) const {
    return (x - lo[0]) + ext[0] * ((y - lo[1]) + ext[1] * (z - lo[2]));
  }
  std::size_t global(std::size_t i, Dims d) const {
    const std::size_t x = i % ext[0] + lo[0];
    const std::size_t y = (i / ext[0]) % ext[1] + lo[1];
    const std::size_t z = i / (ext[0] * ext[1]) + lo[2];
    return x + d.nx * (y + d.ny * z);
  }
};

// pad_mm < 0 gives the tight bounding box; otherwise one voxel more than pad_mm.
Box make_box(const Region& r, Spacing s, double pad_mm) {
  Box b;
  const Dims& d = r.dims();
  const auto& bb = r.bbox();
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t pad = pad_mm < 0 ? 0 : static_cast<std::size_t>(std::ceil(pad_mm / s[a])) + 1;
    b.lo[a] = bb.lo[a] >= pad ? bb.lo[a] - pad : 0;
    const std::size_t hi = std::min(d[a] - 1, bb.hi[a] + pad);
    b.ext[a] = hi - b.lo[a] + 1;
  }
  b.in.assign(b.ext[0] * b.ext[1] * b.ext[2], 0);
  for (auto v : r.voxels()) {
    const std::size_t x = v % d.nx, y = (v / d.nx) % d.ny, z = v / (d.nx * d.ny);
    b.in[b.local(x, y, z)] = 1;
  }
  return b;
}

// Signed distance (negative inside) to the region surface, sampled at the
// centres of the faces separating region and background voxels.
std::vector<double> signed_distance(const Box& b, Spacing s) {
  const Dims d = b.dims();
  const std::array<std::size_t, 3> step{1, d.nx, d.nx * d.ny};
  std::vector<double> best(b.in.size(), kInf), f(b.in.size());
  for (std::size_t a = 0; a < 3; ++a) {
    std::fill(f.begin(), f.end(), kInf);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t pos = (i / step[a]) % d[a];
      if (pos + 1 < d[a] && b.in[i] != b.in[i + step[a]]) f[i] = 0.0;
    }
    edt_all(f, d, s, a, 0.5);
    for (std::size_t i = 0; i < f.size(); ++i) best[i] = std::min(best[i], f[i]);
  }
  for (std::size_t i = 0; i < best.size(); ++i) {
    const double v = std::min(std::sqrt(best[i]), 1e9);
    best[i] = b.in[i] ? -v : v;
  }
  // A 3x3x3 mean is exact on locally linear distance fields and removes
  // most of the staircase error of the face samples. Signs stay tied to
  // membership so region voxels never count as outside.
  for (std::size_t a = 0; a < 3; ++a) {
    if (d[a] < 2) continue;
    f = best;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t pos = (i / step[a]) % d[a];
      const double lo = pos > 0 ? f[i - step[a]] : f[i];
      const double hi = pos + 1 < d[a] ? f[i + step[a]] : f[i];
      best[i] = (lo + f[i] + hi) / 3.0;
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) best[i] = b.in[i] ? std::min(best[i], -1e-9) : std::max(best[i], 1e-9);
  return best;
}

Region box_to_region(const Box& b, Dims d, const std::vector<std::uint8_t>& keep) {
  std::vector<Region::Index> vox;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) vox.push_back(static_cast<Region::Index>(b.global(i, d)));
  }
  std::sort(vox.begin(), vox.end());
  return Region(d, std::move(vox));
}

Region restrict_to(const Region& r, const BinaryMask& m) {
  std::vector<Region::Index> vox;
  for (auto v : r.voxels()) {
    if (m[v]) vox.push_back(v);
  }
  return Region(r.dims(), std::move(vox));
}

std::array<double, 3> gradient(const Volume3D& v, std::size_t i) {
  const Dims d = v.dims();
  const Spacing s = v.spacing();
  const std::size_t x = i % d.nx, y = (i / d.nx) % d.ny, z = i / (d.nx * d.ny);
  const std::array<std::size_t, 3> p{x, y, z};
  const std::array<std::size_t, 3> step{1, d.nx, d.nx * d.ny};
  std::array<double, 3> g{0, 0, 0};
  for (std::size_t a = 0; a < 3; ++a) {
    if (d[a] < 2) continue;
    const bool lo = p[a] == 0, hi = p[a] + 1 == d[a];
    const std::size_t i0 = lo ? i : i - step[a];
    const std::size_t i1 = hi ? i : i + step[a];
    const double span = (lo || hi ? 1.0 : 2.0) * s[a];
    g[a] = (v[i1] - v[i0]) / span;
  }
  return g;
}

std::array<double, 3> centroid_mm(const Region& r, Spacing s) {
  const Dims& d = r.dims();
  std::array<double, 3> c{0, 0, 0};
  for (auto v : r.voxels()) {
    c[0] += static_cast<double>(v % d.nx);
    c[1] += static_cast<double>((v / d.nx) % d.ny);
    c[2] += static_cast<double>(v / (d.nx * d.ny));
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, r.size()));
  for (std::size_t a = 0; a < 3; ++a) c[a] = c[a] / n * s[a];
  return c;
}

// ---- convex hull -----------------------------------------------------------

using P3 = std::array<std::int64_t, 3>;

std::int64_t orient(const P3& a, const P3& b, const P3& c, const P3& d) {
  const std::int64_t ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const std::int64_t vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const std::int64_t wx = d[0] - a[0], wy = d[1] - a[1], wz = d[2] - a[2];
  return (uy * vz - uz * vy) * wx + (uz * vx - ux * vz) * wy + (ux * vy - uy * vx) * wz;
}

P3 cross(const P3& u, const P3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}
P3 minus(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
std::int64_t dot3(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Lattice points inside (or on) a convex polygon given by integer 2D
// points; each is lifted onto the plane n.q = c through `lift`.
template <class Lift>
std::size_t lattice_in_polygon(std::vector<std::array<std::int64_t, 2>> p, Lift lift) {
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  auto turn = [](const auto& o, const auto& a, const auto& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<std::int64_t, 2>> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);  // counter-clockwise, last point == first dropped
  std::int64_t ulo = p.front()[0], uhi = p.back()[0], vlo = p.front()[1], vhi = p.front()[1];
  for (const auto& q : p) vlo = std::min(vlo, q[1]), vhi = std::max(vhi, q[1]);
  std::size_t n = 0;
  for (std::int64_t u = ulo; u <= uhi; ++u)
    for (std::int64_t v = vlo; v <= vhi; ++v) {
      bool in = true;
      for (std::size_t i = 0; i < h.size() && in; ++i) in = turn(h[i], h[(i + 1) % h.size()], std::array{u, v}) >= 0;
      if (in && lift(u, v)) ++n;
    }
  return n;
}

// Number of lattice points in the convex hull of integer points.
std::size_t lattice_points_in_hull(std::vector<P3> pts) {
  if (pts.empty()) return 0;
  std::mt19937_64 rng(0x5eed);  // fixed shuffle: expected-case incremental cost
  std::shuffle(pts.begin(), pts.end(), rng);
  const std::size_t n = pts.size();
  std::size_t i1 = 0, i2 = 0, i3 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (dot3(minus(pts[i], pts[0]), minus(pts[i], pts[0])) > dot3(minus(pts[i1], pts[0]), minus(pts[i1], pts[0])))
      i1 = i;
  }
  if (i1 == 0) return 1;
  const P3 u = minus(pts[i1], pts[0]);
  std::int64_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const P3 c = cross(u, minus(pts[i], pts[0]));
    if (dot3(c, c) > best) best = dot3(c, c), i2 = i;
  }
  if (best == 0) {
    // Collinear: lattice points on the segment between the extremes.
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const std::int64_t t = dot3(u, minus(pts[i], pts[0]));
      if (t < dot3(u, minus(pts[lo], pts[0]))) lo = i;
      if (t > dot3(u, minus(pts[hi], pts[0]))) hi = i;
    }
    const P3 d = minus(pts[hi], pts[lo]);
    return static_cast<std::size_t>(std::gcd(std::gcd(std::abs(d[0]), std::abs(d[1])), std::abs(d[2]))) + 1;
  }
  const P3 normal = cross(u, minus(pts[i2], pts[0]));
  best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::int64_t o = std::abs(orient(pts[0], pts[i1], pts[i2], pts[i]));
    if (o > best) best = o, i3 = i;
  }
  if (best == 0) {
    // Coplanar: 2D hull in the projection that drops the dominant normal axis.
    std::size_t k = 0;
    for (std::size_t a = 1; a < 3; ++a) {
      if (std::abs(normal[a]) > std::abs(normal[k])) k = a;
    }
    const std::size_t a0 = (k + 1) % 3, a1 = (k + 2) % 3;
    std::vector<std::array<std::int64_t, 2>> p2;
    for (const auto& p : pts) p2.push_back({p[a0], p[a1]});
    const std::int64_t c = dot3(normal, pts[0]);
    return lattice_in_polygon(std::move(p2), [&](std::int64_t x, std::int64_t y) {
      return (c - normal[a0] * x - normal[a1] * y) % normal[k] == 0;
    });
  }

  std::vector<std::array<std::size_t, 3>> faces;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t inner) {
    if (orient(pts[a], pts[b], pts[c], pts[inner]) > 0) std::swap(b, c);
    faces.push_back({a, b, c});
  };
  add_face(0, i1, i2, i3);
  add_face(0, i1, i3, i2);
  add_face(0, i2, i3, i1);
  add_face(i1, i2, i3, 0);

  std::vector<std::uint8_t> visible;
  std::unordered_set<std::uint64_t> edges;
  std::vector<std::array<std::size_t, 3>> kept;
  for (std::size_t p = 1; p < n; ++p) {
    if (p == i1 || p == i2 || p == i3) continue;
    visible.assign(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (orient(pts[faces[f][0]], pts[faces[f][1]], pts[faces[f][2]], pts[p]) > 0) visible[f] = 1, any = true;
    }
    if (!any) continue;
    edges.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      for (int e = 0; e < 3; ++e) edges.insert(faces[f][e] * n + faces[f][(e + 1) % 3]);
    }
    kept.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) {
        kept.push_back(faces[f]);
        continue;
      }
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = faces[f][e], b = faces[f][(e + 1) % 3];
        if (!edges.count(b * n + a)) kept.push_back({a, b, p});
      }
    }
    faces.swap(kept);
  }

  // Half-spaces n.q <= c, one per distinct face plane.
  std::vector<std::pair<P3, std::int64_t>> planes;
  for (const auto& f : faces) {
    const P3 nf = cross(minus(pts[f[1]], pts[f[0]]), minus(pts[f[2]], pts[f[0]]));
    if (nf == P3{0, 0, 0}) continue;
    const std::int64_t g = std::gcd(std::gcd(std::abs(nf[0]), std::abs(nf[1])), std::abs(nf[2]));
    const P3 nn{nf[0] / g, nf[1] / g, nf[2] / g};
    planes.emplace_back(nn, dot3(nn, pts[f[0]]));
  }
  std::sort(planes.begin(), planes.end());
  planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
  P3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts)
    for (std::size_t a = 0; a < 3; ++a) lo[a] = std::min(lo[a], p[a]), hi[a] = std::max(hi[a], p[a]);
  std::size_t count = 0;
  for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
    for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
      std::int64_t xl = lo[0], xh = hi[0];
      for (const auto& [nn, c] : planes) {
        const std::int64_t rhs = c - nn[1] * y - nn[2] * z;
        if (nn[0] > 0) {
          xh = std::min(xh, floor_div(rhs, nn[0]));
        } else if (nn[0] < 0) {
          xl = std::max(xl, ceil_div(rhs, nn[0]));
        } else if (rhs < 0) {
          xh = xl - 1;
        }
        if (xh < xl) break;
      }
      if (xh >= xl) count += static_cast<std::size_t>(xh - xl + 1);
    }
  return count;
}

// ---- fitting ---------------------------------------------------------------

double model(double A, double alpha, double beta, double t) {
  return A * (1.0 - std::exp(-alpha * t)) * std::exp(-beta * t);
}

double sse(const std::vector<double>& e, const std::vector<double>& t, double A, double alpha, double beta) {
  double s = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r = e[i] - model(A, alpha, beta, t[i]);
    s += r * r;
  }
  return s;
}

bool solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3> b, std::array<double, 3>& x) {
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < 1e-300) return false;
    std::swap(m[c], m[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < 3; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 3; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < 3; ++k) s -= m[c][k] * x[k];
    x[c] = s / m[c][c];
  }
  return true;
}

struct RegionStats {
  double mean = 0;
  double var = 0;
};

RegionStats region_stats(const Volume3D& v, const Region& r) {
  RegionStats s;
  if (r.empty()) return s;
  for (auto i : r.voxels()) s.mean += v[i];
  s.mean /= static_cast<double>(r.size());
  for (auto i : r.voxels()) s.var += (v[i] - s.mean) * (v[i] - s.mean);
  s.var /= static_cast<double>(r.size());
  return s;
}

std::vector<double> relative_enhancement(const std::vector<Volume3D>& dce, const Region& r, bool* guarded) {
  std::vector<double> m(dce.size());
  for (std::size_t i = 0; i < dce.size(); ++i) m[i] = region_stats(dce[i], r).mean;
  double base = m.empty() ? 0.0 : m[0];
  if (!(base > 1e-6)) {
    base = 1e-6;
    if (guarded) *guarded = true;
  }
  std::vector<double> e(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) e[i] = (m[i] - m[0]) / base;
  return e;
}

const char* kSequenceNames[] = {"t1", "t2", "dce0"};

}  // namespace

// ---- FeatureVector ---------------------------------------------------------

void FeatureVector::append(const FeatureVector& o) {
  names.insert(names.end(), o.names.begin(), o.names.end());
  values.insert(values.end(), o.values.begin(), o.values.end());
}

double FeatureVector::get(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw InvalidArgument("no feature named '" + name + "'");
}

const std::array<const char*, 13> kHaralickNames = {
    "asm",         "contrast",     "correlation",  "variance",        "idm",  "sum_average", "sum_variance",
    "sum_entropy", "entropy",      "diff_variance", "diff_entropy",   "imc1", "imc2"};

std::string feature_schema_id(std::size_t dce_frames) { return "siftcad-features-v1-f" + std::to_string(dce_frames); }

std::vector<std::string> feature_schema(std::size_t dce_frames) {
  std::vector<std::string> s;
  for (const char* q : kSequenceNames) {
    s.push_back(std::string(q) + "_mean");
    s.push_back(std::string(q) + "_std");
  }
  for (const char* q : {"t1", "t2"}) {
    s.push_back(std::string(q) + "_kurtosis");
    s.push_back(std::string(q) + "_skewness");
  }
  s.insert(s.end(), {"t2_p20", "t2_p90", "t2_edema_p92_2mm", "t2_edema_p98_10mm", "t2_edema_p98_20mm",
                     "flag_edema_shell_empty"});
  for (const char* q : {"t2", "dce1", "sub"}) {
    for (const char* h : kHaralickNames) s.push_back(std::string("haralick_") + q + "_" + h);
  }
  s.push_back("flag_haralick_single_voxel");
  std::vector<std::string> margin{"t2"};
  for (std::size_t i = 0; i < dce_frames; ++i) margin.push_back("dce" + std::to_string(i));
  for (const auto& q : margin) s.push_back("margin_sharpness_" + q);
  for (const auto& q : margin) s.push_back("rgi_" + q);
  s.push_back("flag_margin_shell_empty");
  s.insert(s.end(), {"esd", "extent", "solidity", "irregularity", "fat_fraction"});
  s.insert(s.end(), {"kin_peak", "kin_time_to_peak", "kin_uptake", "kin_washout", "kin_var_peak",
                     "kin_var_time_to_peak", "kin_var_uptake", "kin_var_washout", "kin_param_A", "kin_param_alpha",
                     "kin_param_beta", "kin_param_rmse", "kin_blooming", "kin_peripheral_uptake",
                     "flag_kin_baseline_guard", "flag_kin_fit_fallback", "flag_kin_core_empty",
                     "flag_kin_peripheral_guard"});
  return s;
}

// ---- distances and shells --------------------------------------------------

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, Dims dims,
                                               Spacing spacing) {
  if (feature.size() != dims.nx * dims.ny * dims.nz) throw InvalidArgument("distance transform: size mismatch");
  std::vector<double> d(feature.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = feature[i] ? 0.0 : kInf;
  edt_all(d, dims, spacing, 0, 0.0);
  return d;
}

Shell shell_mask(const Region& r, double inner_mm, double outer_mm, Spacing spacing) {
  if (inner_mm < 0 || outer_mm < 0) throw InvalidArgument("shell_mask: negative offset");
  if (inner_mm == 0 && outer_mm == 0) throw InvalidArgument("shell_mask: both offsets are zero");
  Shell s;
  s.inner_mm = inner_mm;
  s.outer_mm = outer_mm;
  if (r.empty()) return s;
  const Box b = make_box(r, spacing, outer_mm);
  const auto sd = signed_distance(b, spacing);
  std::vector<std::uint8_t> keep(sd.size());
  for (std::size_t i = 0; i < sd.size(); ++i) keep[i] = sd[i] >= -inner_mm && sd[i] <= outer_mm;
  s.mask = box_to_region(b, r.dims(), keep);
  return s;
}

Region erode_region(const Region& r, double depth_mm, Spacing spacing) {
  if (r.empty()) return r;
  const Box b = make_box(r, spacing, 0.0);
  const auto sd = signed_distance(b, spacing);
  std::vector<std::uint8_t> keep(sd.size());
  for (std::size_t i = 0; i < sd.size(); ++i) keep[i] = b.in[i] && sd[i] <= -depth_mm;
  return box_to_region(b, r.dims(), keep);
}

// ---- intensity -------------------------------------------------------------

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  m.std = std::sqrt(m2);
  if (m2 > 1e-24 * std::max(1.0, m.mean * m.mean)) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

std::vector<double> sample(const Volume3D& v, const Region& r) {
  std::vector<double> out;
  out.reserve(r.size());
  for (auto i : r.voxels()) out.push_back(v[i]);
  return out;
}

// ---- texture ---------------------------------------------------------------

std::vector<double> glcm(const Volume3D& v, const Region& r) {
  const std::size_t L = kHaralickLevels;
  std::vector<double> p(L * L, 0.0);
  if (r.size() < 2) return p;
  double lo = kInf, hi = -kInf;
  for (auto i : r.voxels()) lo = std::min(lo, v[i]), hi = std::max(hi, v[i]);
  const Box b = make_box(r, v.spacing(), 0.0);
  std::vector<std::int32_t> q(b.in.size(), -1);
  const Dims& d = r.dims();
  for (auto i : r.voxels()) {
    const std::size_t x = i % d.nx, y = (i / d.nx) % d.ny, z = i / (d.nx * d.ny);
    const double t = hi > lo ? (v[i] - lo) / (hi - lo) * static_cast<double>(L) : 0.0;
    q[b.local(x, y, z)] = static_cast<std::int32_t>(std::min<double>(L - 1, std::floor(t)));
  }
  const std::ptrdiff_t ex = static_cast<std::ptrdiff_t>(b.ext[0]), ey = static_cast<std::ptrdiff_t>(b.ext[1]),
                       ez = static_cast<std::ptrdiff_t>(b.ext[2]);
  double total = 0;
  for (int dz = 0; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy < 0 || (dy == 0 && dx <= 0))) continue;
        for (std::ptrdiff_t z = 0; z + dz < ez; ++z)
          for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -dy); y < ey && y + dy < ey; ++y)
            for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, -dx); x < ex && x + dx < ex; ++x) {
              const auto a = q[static_cast<std::size_t>(x + ex * (y + ey * z))];
              if (a < 0) continue;
              const auto c = q[static_cast<std::size_t>((x + dx) + ex * ((y + dy) + ey * (z + dz)))];
              if (c < 0) continue;
              p[static_cast<std::size_t>(a) * L + static_cast<std::size_t>(c)] += 1.0;
              p[static_cast<std::size_t>(c) * L + static_cast<std::size_t>(a)] += 1.0;
              total += 2.0;
            }
      }
  if (total > 0) {
    for (double& x : p) x /= total;
  }
  return p;
}

std::array<double, 13> haralick_from_glcm(const std::vector<double>& p, std::size_t L) {
  std::array<double, 13> f{};
  auto plogp = [](double x) { return x > 0 ? x * std::log(x) : 0.0; };
  std::vector<double> px(L, 0.0), py(L, 0.0), psum(2 * L - 1, 0.0), pdiff(L, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      const double v = p[i * L + j];
      px[i] += v;
      py[j] += v;
      psum[i + j] += v;
      pdiff[i > j ? i - j : j - i] += v;
      total += v;
    }
  if (total <= 0) return f;
  double mux = 0, muy = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < L; ++i) mux += i * px[i], muy += i * py[i];
  for (std::size_t i = 0; i < L; ++i) {
    sx += (i - mux) * (i - mux) * px[i];
    sy += (i - muy) * (i - muy) * py[i];
  }
  double asm_ = 0, contrast = 0, corr = 0, idm = 0, ent = 0, hxy1 = 0, hxy2 = 0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      const double v = p[i * L + j];
      const double di = static_cast<double>(i) - static_cast<double>(j);
      asm_ += v * v;
      contrast += di * di * v;
      corr += static_cast<double>(i * j) * v;
      idm += v / (1.0 + di * di);
      ent -= plogp(v);
      const double pp = px[i] * py[j];
      if (pp > 0) {
        hxy1 -= v * std::log(pp);
        hxy2 -= pp * std::log(pp);
      }
    }
  f[0] = asm_;
  f[1] = contrast;
  f[2] = sx > 0 && sy > 0 ? (corr - mux * muy) / std::sqrt(sx * sy) : 0.0;
  f[3] = sx;
  f[4] = idm;
  double savg = 0, svar = 0, sent = 0;
  for (std::size_t k = 0; k < psum.size(); ++k) savg += k * psum[k], sent -= plogp(psum[k]);
  for (std::size_t k = 0; k < psum.size(); ++k) svar += (k - savg) * (k - savg) * psum[k];
  f[5] = savg;
  f[6] = svar;
  f[7] = sent;
  f[8] = ent;
  double dmean = 0, dvar = 0, dent = 0;
  for (std::size_t k = 0; k < L; ++k) dmean += k * pdiff[k], dent -= plogp(pdiff[k]);
  for (std::size_t k = 0; k < L; ++k) dvar += (k - dmean) * (k - dmean) * pdiff[k];
  f[9] = dvar;
  f[10] = dent;
  double hx = 0, hy = 0;
  for (std::size_t i = 0; i < L; ++i) hx -= plogp(px[i]), hy -= plogp(py[i]);
  const double hmax = std::max(hx, hy);
  f[11] = hmax > 0 ? (ent - hxy1) / hmax : 0.0;
  f[12] = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - ent))));
  for (double& x : f) {
    if (std::abs(x) < 1e-15) x = 0.0;
  }
  return f;
}

std::array<double, 13> haralick(const Volume3D& v, const Region& r, bool* single_voxel) {
  if (single_voxel) *single_voxel = r.size() < 2;
  if (r.size() < 2) return {};
  return haralick_from_glcm(glcm(v, r), kHaralickLevels);
}

// ---- margin ----------------------------------------------------------------

double margin_sharpness(const Volume3D& v, const Region& r, bool* empty_shell) {
  const Shell s = shell_mask(r, 1.0, 2.0, v.spacing());
  if (empty_shell) *empty_shell = s.empty();
  if (s.empty()) return 0.0;
  double acc = 0;
  for (auto i : s.mask.voxels()) {
    const auto g = gradient(v, i);
    acc += std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
  }
  return acc / static_cast<double>(s.mask.size());
}

double radial_gradient_index(const Volume3D& v, const Region& r, bool* empty_shell) {
  const Spacing sp = v.spacing();
  const Shell s = shell_mask(r, 1.0, 2.0, sp);
  if (empty_shell) *empty_shell = s.empty();
  if (s.empty()) return 0.0;
  const auto c = centroid_mm(r, sp);
  const Dims& d = r.dims();
  double num = 0, den = 0;
  for (auto i : s.mask.voxels()) {
    const auto g = gradient(v, i);
    const double gm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    const std::array<double, 3> p{static_cast<double>(i % d.nx) * sp.x,
                                  static_cast<double>((i / d.nx) % d.ny) * sp.y,
                                  static_cast<double>(i / (d.nx * d.ny)) * sp.z};
    const std::array<double, 3> u{p[0] - c[0], p[1] - c[1], p[2] - c[2]};
    const double um = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    den += gm;
    if (um > 0) num += (g[0] * u[0] + g[1] * u[1] + g[2] * u[2]) / um;
  }
  return den > 0 ? std::clamp(num / den, -1.0, 1.0) : 0.0;
}

// ---- morphology ------------------------------------------------------------

double convex_hull_volume(const Region& r, Spacing spacing) {
  if (r.empty()) return 0.0;
  const Box b = make_box(r, spacing, -1.0);
  const std::array<std::size_t, 3> step{1, b.ext[0], b.ext[0] * b.ext[1]};
  // A voxel with region neighbours on both sides along some axis is the
  // midpoint of two region points, hence never a hull vertex.
  std::vector<P3> pts;
  for (std::size_t z = 0; z < b.ext[2]; ++z)
    for (std::size_t y = 0; y < b.ext[1]; ++y)
      for (std::size_t x = 0; x < b.ext[0]; ++x) {
        const std::size_t i = x + b.ext[0] * (y + b.ext[1] * z);
        if (!b.in[i]) continue;
        const std::array<std::size_t, 3> p{x, y, z};
        bool inner = false;
        for (std::size_t a = 0; a < 3 && !inner; ++a) {
          inner = p[a] > 0 && p[a] + 1 < b.ext[a] && b.in[i - step[a]] && b.in[i + step[a]];
        }
        if (!inner) pts.push_back({std::int64_t(x), std::int64_t(y), std::int64_t(z)});
      }
  return static_cast<double>(lattice_points_in_hull(std::move(pts))) * spacing.voxel_volume();
}

double surface_area(const Region& r, Spacing s) {
  if (r.empty()) return 0.0;
  const Box b = make_box(r, s, -1.0);
  const std::array<double, 3> area{s.y * s.z, s.x * s.z, s.x * s.y};
  const std::array<std::size_t, 3> step{1, b.ext[0], b.ext[0] * b.ext[1]};
  double a = 0;
  for (std::size_t z = 0; z < b.ext[2]; ++z)
    for (std::size_t y = 0; y < b.ext[1]; ++y)
      for (std::size_t x = 0; x < b.ext[0]; ++x) {
        const std::size_t i = x + b.ext[0] * (y + b.ext[1] * z);
        if (!b.in[i]) continue;
        const std::array<std::size_t, 3> p{x, y, z};
        for (std::size_t ax = 0; ax < 3; ++ax) {
          if (p[ax] == 0 || !b.in[i - step[ax]]) a += area[ax];
          if (p[ax] + 1 == b.ext[ax] || !b.in[i + step[ax]]) a += area[ax];
        }
      }
  return a * 2.0 / 3.0;
}

ShapeFeatures shape_features(const Region& r, Spacing spacing, double volume_mm3, const BinaryMask* fat) {
  if (r.empty()) throw InvalidArgument("shape features of an empty region");
  ShapeFeatures f;
  f.esd = std::cbrt(6.0 * volume_mm3 / std::numbers::pi);
  const double n = static_cast<double>(r.size());
  f.extent = n / static_cast<double>(r.bbox().voxel_count());
  const double hull = convex_hull_volume(r, spacing);
  f.solidity = hull > 0 ? std::min(1.0, n * spacing.voxel_volume() / hull) : 1.0;
  const double area = surface_area(r, spacing);
  const double sphere_area = std::cbrt(std::numbers::pi) * std::pow(6.0 * volume_mm3, 2.0 / 3.0);
  f.irregularity = area > 0 ? std::clamp(1.0 - sphere_area / area, 0.0, 1.0) : 0.0;
  if (fat) {
    std::size_t k = 0;
    for (auto i : r.voxels()) k += (*fat)[i] != 0;
    f.fat_fraction = static_cast<double>(k) / n;
  }
  return f;
}

// ---- kinetics --------------------------------------------------------------

CurveFeatures curve_features(const std::vector<double>& e, const std::vector<double>& t) {
  if (e.size() != t.size() || e.size() < 2) throw InvalidArgument("curve features: need >= 2 matching points");
  CurveFeatures f;
  std::size_t ip = 1;
  for (std::size_t i = 2; i < e.size(); ++i) {
    if (e[i] > e[ip]) ip = i;
  }
  if (!(e[ip] > 0.0)) return f;
  f.peak = e[ip];
  f.time_to_peak = t[ip];
  f.uptake = t[1] > 0 ? e[1] / t[1] : 0.0;
  const std::size_t last = e.size() - 1;
  f.washout = ip == last ? 0.0 : (e[ip] - e[last]) / (t[last] - t[ip]);
  return f;
}

ParametricFit fit_enhancement(const std::vector<double>& e, const std::vector<double>& t) {
  if (e.size() != t.size() || e.empty()) throw InvalidArgument("fit_enhancement: size mismatch");
  ParametricFit fit;
  if (std::all_of(e.begin(), e.end(), [](double x) { return x == 0.0; })) return fit;
  // Coarse grid over (alpha, beta); A is linear and solved exactly.
  double best = kInf;
  for (int ia = 0; ia < 40; ++ia) {
    const double alpha = 1e-3 * std::pow(1000.0, ia / 39.0);
    for (int ib = 0; ib < 21; ++ib) {
      const double beta = ib == 0 ? 0.0 : 1e-5 * std::pow(1000.0, (ib - 1) / 19.0);
      double gg = 0, ge = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double g = model(1.0, alpha, beta, t[i]);
        gg += g * g;
        ge += g * e[i];
      }
      if (gg <= 0) continue;
      const double A = ge / gg;
      const double s = sse(e, t, A, alpha, beta);
      if (s < best) best = s, fit.A = A, fit.alpha = alpha, fit.beta = beta;
    }
  }
  // Levenberg-Marquardt refinement with alpha > 0, beta >= 0.
  double lambda = 1e-3;
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    std::array<std::array<double, 3>, 3> JtJ{};
    std::array<double, 3> Jtr{};
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double ea = std::exp(-fit.alpha * t[i]), eb = std::exp(-fit.beta * t[i]);
      const double g = (1.0 - ea) * eb;
      const std::array<double, 3> J{g, fit.A * t[i] * ea * eb, -fit.A * t[i] * g};
      const double r = e[i] - fit.A * g;
      for (std::size_t a = 0; a < 3; ++a) {
        Jtr[a] += J[a] * r;
        for (std::size_t b = 0; b < 3; ++b) JtJ[a][b] += J[a] * J[b];
      }
    }
    bool stepped = false;
    for (int tries = 0; tries < 30 && !stepped; ++tries) {
      auto M = JtJ;
      for (std::size_t a = 0; a < 3; ++a) M[a][a] += lambda * std::max(JtJ[a][a], 1e-12);
      std::array<double, 3> dx{};
      if (!solve3(M, Jtr, dx)) {
        lambda *= 10;
        continue;
      }
      const double A = fit.A + dx[0];
      const double alpha = std::max(1e-6, fit.alpha + dx[1]);
      const double beta = std::max(0.0, fit.beta + dx[2]);
      const double s = sse(e, t, A, alpha, beta);
      if (std::isfinite(s) && s <= best) {
        converged = best - s <= 1e-14 * std::max(1.0, best) ||
                    (std::abs(dx[0]) <= 1e-10 * std::max(1.0, std::abs(A)) && std::abs(dx[1]) <= 1e-12 &&
                     std::abs(dx[2]) <= 1e-12);
        best = s, fit.A = A, fit.alpha = alpha, fit.beta = beta;
        lambda = std::max(1e-12, lambda / 10);
        stepped = true;
      } else {
        lambda *= 10;
      }
    }
    if (!stepped) converged = true;  // no descent direction left: at a minimum of the damped model
  }
  fit.fallback = !converged;
  fit.rmse = std::sqrt(best / static_cast<double>(e.size()));
  return fit;
}

// ---- context and extraction --------------------------------------------------

FeatureContext::FeatureContext(const BreastCase& c, int max_scale) : case_(&c) {
  c.validate();
  if (c.t1.empty() || c.t2.empty() || c.dce.size() < 2) throw InvalidArgument("features need T1, T2 and >= 2 DCE frames");
  if (max_scale < 1) throw InvalidArgument("FeatureContext: max_scale must be >= 1");
  ScaledSequences s1;
  s1.t1 = normalize_to_fat(c.t1, c.fat_mask);
  s1.t2 = normalize_to_fat(c.t2, c.fat_mask);
  const double f0 = masked_mean(c.dce[0], c.fat_mask);
  if (!(f0 > 0)) throw DegenerateInput("DCE_0 fat mean is not positive");
  for (const auto& f : c.dce) {
    Volume3D n = f;
    for (double& x : n.storage()) x /= f0;
    s1.dce.push_back(std::move(n));
  }
  s1.dce0 = normalize_to_fat(c.dce[0], c.fat_mask);
  s1.subtraction = subtract(s1.dce[1], s1.dce[0]);
  s1.breast = c.breast_mask;
  s1.fat = c.fat_mask;
  scales_.push_back(std::move(s1));
  for (int m = 2; m <= max_scale; ++m) {
    const ScaledSequences& b = scales_.front();
    const double g = lll_gain(m);
    auto down = [&](const Volume3D& v) {
      Volume3D out = scale_image(v, m).volume;
      for (double& x : out.storage()) x /= g;
      return out;
    };
    ScaledSequences s;
    s.scale = m;
    s.t1 = down(b.t1);
    s.t2 = down(b.t2);
    s.dce0 = down(b.dce0);
    for (const auto& f : b.dce) s.dce.push_back(down(f));
    s.subtraction = subtract(s.dce[1], s.dce[0]);
    s.breast = downscale_mask(b.breast, m);
    s.fat = downscale_mask(b.fat, m);
    scales_.push_back(std::move(s));
  }
}

const ScaledSequences& FeatureContext::at(int m) const {
  if (m < 1 || static_cast<std::size_t>(m) > scales_.size()) throw InvalidArgument("FeatureContext: scale not built");
  return scales_[static_cast<std::size_t>(m - 1)];
}

FeatureVector intensity_features(const RegionCandidate& rc, const FeatureContext& ctx) {
  const ScaledSequences& s = ctx.at(rc.scale);
  const Region& r = rc.region;
  FeatureVector f;
  const Volume3D* vols[] = {&s.t1, &s.t2, &s.dce0};
  std::array<Moments, 3> mo;
  for (std::size_t k = 0; k < 3; ++k) {
    mo[k] = moments(sample(*vols[k], r));
    f.add(std::string(kSequenceNames[k]) + "_mean", mo[k].mean);
    f.add(std::string(kSequenceNames[k]) + "_std", mo[k].std);
  }
  for (std::size_t k = 0; k < 2; ++k) {
    f.add(std::string(kSequenceNames[k]) + "_kurtosis", mo[k].kurtosis);
    f.add(std::string(kSequenceNames[k]) + "_skewness", mo[k].skewness);
  }
  const auto t2 = sample(s.t2, r);
  f.add("t2_p20", percentile(t2, 20));
  f.add("t2_p90", percentile(t2, 90));
  bool empty = false;
  const std::array<std::pair<double, double>, 3> edema{{{2.0, 92.0}, {10.0, 98.0}, {20.0, 98.0}}};
  const char* names[] = {"t2_edema_p92_2mm", "t2_edema_p98_10mm", "t2_edema_p98_20mm"};
  for (std::size_t k = 0; k < 3; ++k) {
    const Region shell = restrict_to(shell_mask(r, 0.0, edema[k].first, rc.spacing).mask, s.breast);
    if (shell.empty()) {
      empty = true;
      f.add(names[k], percentile(t2, edema[k].second));
    } else {
      f.add(names[k], percentile(sample(s.t2, shell), edema[k].second));
    }
  }
  f.add("flag_edema_shell_empty", empty ? 1.0 : 0.0);
  return f;
}

FeatureVector haralick_features(const RegionCandidate& rc, const FeatureContext& ctx) {
  const ScaledSequences& s = ctx.at(rc.scale);
  FeatureVector f;
  const std::pair<const char*, const Volume3D*> vols[] = {{"t2", &s.t2}, {"dce1", &s.dce[1]}, {"sub", &s.subtraction}};
  bool single = false;
  for (const auto& [name, v] : vols) {
    const auto h = haralick(*v, rc.region, &single);
    for (std::size_t k = 0; k < h.size(); ++k) f.add(std::string("haralick_") + name + "_" + kHaralickNames[k], h[k]);
  }
  f.add("flag_haralick_single_voxel", single ? 1.0 : 0.0);
  return f;
}

FeatureVector margin_features(const RegionCandidate& rc, const FeatureContext& ctx) {
  const ScaledSequences& s = ctx.at(rc.scale);
  std::vector<std::pair<std::string, const Volume3D*>> vols{{"t2", &s.t2}};
  for (std::size_t i = 0; i < s.dce.size(); ++i) vols.emplace_back("dce" + std::to_string(i), &s.dce[i]);
  FeatureVector f;
  bool empty = false;
  std::vector<double> rgi;
  for (const auto& [name, v] : vols) {
    f.add("margin_sharpness_" + name, margin_sharpness(*v, rc.region, &empty));
    rgi.push_back(radial_gradient_index(*v, rc.region));
  }
  for (std::size_t k = 0; k < vols.size(); ++k) f.add("rgi_" + vols[k].first, rgi[k]);
  f.add("flag_margin_shell_empty", empty ? 1.0 : 0.0);
  return f;
}

FeatureVector morphology_features(const RegionCandidate& rc, const FeatureContext& ctx) {
  const ScaledSequences& s = ctx.at(rc.scale);
  const double vol = rc.physical_volume > 0 ? rc.physical_volume
                                            : static_cast<double>(rc.region.size()) * rc.spacing.voxel_volume();
  const ShapeFeatures sh = shape_features(rc.region, rc.spacing, vol, &s.fat);
  FeatureVector f;
  f.add("esd", sh.esd);
  f.add("extent", sh.extent);
  f.add("solidity", sh.solidity);
  f.add("irregularity", sh.irregularity);
  f.add("fat_fraction", sh.fat_fraction);
  return f;
}

FeatureVector kinetic_features(const RegionCandidate& rc, const FeatureContext& ctx) {
  const BreastCase& c = ctx.breast_case();
  const Region r = original_region(rc, c.dims());
  const Spacing sp = c.spacing();
  const auto& t = c.acquisition_times;
  FeatureVector f;
  bool guarded = false, core_empty = false, peripheral_guard = false;

  const auto e = r.empty() ? std::vector<double>(c.dce.size(), 0.0) : relative_enhancement(c.dce, r, &guarded);
  const CurveFeatures k = curve_features(e, t);

  // Spread of the voxelwise enhancement over time.
  std::vector<double> var(c.dce.size(), 0.0);
  if (!r.empty()) {
    double base = region_stats(c.dce[0], r).mean;
    if (!(base > 1e-6)) base = 1e-6;
    std::vector<double> ev(r.size());
    for (std::size_t i = 1; i < c.dce.size(); ++i) {
      std::size_t n = 0;
      for (auto v : r.voxels()) ev[n++] = (c.dce[i][v] - c.dce[0][v]) / base;
      var[i] = moments(ev).std;
      var[i] *= var[i];
    }
  }
  const CurveFeatures kv = curve_features(var, t);
  const ParametricFit fit = fit_enhancement(e, t);

  double blooming = 0, peripheral = 0;
  if (!r.empty()) {
    const Region shell = shell_mask(r, 1.0, 2.0, sp).mask;
    Region core = erode_region(r, 2.0, sp);
    if (core.empty()) core = r, core_empty = true;
    const auto es = relative_enhancement(c.dce, shell, &guarded);
    const auto ec = relative_enhancement(c.dce, core, &guarded);
    const std::size_t last = c.dce.size() - 1;
    blooming = (es[last] - es[1]) - (ec[last] - ec[1]);
    if (ec[last] > 1e-6) {
      peripheral = es[last] / ec[last];
    } else {
      peripheral_guard = true;
    }
  }
  f.add("kin_peak", k.peak);
  f.add("kin_time_to_peak", k.time_to_peak);
  f.add("kin_uptake", k.uptake);
  f.add("kin_washout", k.washout);
  f.add("kin_var_peak", kv.peak);
  f.add("kin_var_time_to_peak", kv.time_to_peak);
  f.add("kin_var_uptake", kv.uptake);
  f.add("kin_var_washout", kv.washout);
  f.add("kin_param_A", fit.A);
  f.add("kin_param_alpha", fit.alpha);
  f.add("kin_param_beta", fit.beta);
  f.add("kin_param_rmse", fit.rmse);
  f.add("kin_blooming", blooming);
  f.add("kin_peripheral_uptake", peripheral);
  f.add("flag_kin_baseline_guard", guarded ? 1.0 : 0.0);
  f.add("flag_kin_fit_fallback", fit.fallback ? 1.0 : 0.0);
  f.add("flag_kin_core_empty", core_empty ? 1.0 : 0.0);
  f.add("flag_kin_peripheral_guard", peripheral_guard ? 1.0 : 0.0);
  return f;
}

FeatureVector extract_all(const RegionCandidate& rc, const FeatureContext& ctx) {
  if (rc.region.empty()) throw InvalidArgument("extract_all: empty candidate");
  if (rc.region.dims() != ctx.at(rc.scale).t2.dims()) throw InvalidArgument("extract_all: candidate grid mismatch");
  FeatureVector f;
  f.schema = feature_schema_id(ctx.dce_frames());
  f.append(intensity_features(rc, ctx));
  f.append(haralick_features(rc, ctx));
  f.append(margin_features(rc, ctx));
  f.append(morphology_features(rc, ctx));
  f.append(kinetic_features(rc, ctx));
  for (double& v : f.values) {
    if (!std::isfinite(v)) v = 0.0;
  }
  return f;
}

std::vector<FeatureVector> extract_features(const std::vector<RegionCandidate>& cands, const FeatureContext& ctx) {
  std::vector<FeatureVector> out(cands.size());
  parallel_for(cands.size(), [&](std::size_t i) { out[i] = extract_all(cands[i], ctx); });
  return out;
}

void write_feature_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "case_id,candidate_id,label";
  if (!rows.empty()) {
    for (const auto& n : rows.front().features.names) out << ',' << n;
  }
  out << '\n';
  for (const auto& r : rows) {
    if (!rows.empty() && r.features.names.size() != rows.front().features.names.size())
      throw InvalidArgument("feature CSV: rows with different schemas");
    out << r.case_id << ',' << r.candidate_id << ',' << label_name(r.label);
    for (double v : r.features.values) out << ',' << v;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace siftcad
