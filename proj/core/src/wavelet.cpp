#include "siftcad/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace siftcad {
namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kNorm = 4.0 * std::numbers::sqrt2;

// Calls fn(line_in, line_out) for every line along `axis`, where the output
// grid differs from the input only in its length along that axis.
template <typename Fn>
void for_each_line(const Volume3D& in, Volume3D& out, std::size_t axis, Fn&& fn) {
  const Dims di = in.dims(), dout = out.dims();
  const std::array<std::size_t, 3> ni{di.nx, di.ny, di.nz};
  const std::array<std::size_t, 3> no{dout.nx, dout.ny, dout.nz};
  const std::array<std::size_t, 3> si{1, di.nx, di.nx * di.ny};
  const std::array<std::size_t, 3> so{1, dout.nx, dout.nx * dout.ny};
  const std::size_t a1 = axis == 0 ? 1 : 0;
  const std::size_t a2 = axis == 2 ? 1 : 2;
  std::vector<double> line_in(ni[axis]), line_out(no[axis]);
  for (std::size_t j = 0; j < ni[a2]; ++j) {
    for (std::size_t i = 0; i < ni[a1]; ++i) {
      const std::size_t bi = i * si[a1] + j * si[a2];
      const std::size_t bo = i * so[a1] + j * so[a2];
      for (std::size_t k = 0; k < ni[axis]; ++k) line_in[k] = in[bi + k * si[axis]];
      fn(line_in, line_out);
      for (std::size_t k = 0; k < no[axis]; ++k) out[bo + k * so[axis]] = line_out[k];
    }
  }
}

Dims with_axis(Dims d, std::size_t axis, std::size_t n) {
  if (axis == 0) d.nx = n;
  if (axis == 1) d.ny = n;
  if (axis == 2) d.nz = n;
  return d;
}

Spacing scaled_spacing(Spacing s, double f) { return {s.x * f, s.y * f, s.z * f}; }

std::pair<Volume3D, Volume3D> analyze_axis(const Volume3D& v, std::size_t axis, Spacing out_spacing) {
  const Dims dc = with_axis(v.dims(), axis, db2_coarse_length(v.dims()[axis]));
  Volume3D lo(dc, out_spacing), hi(dc, out_spacing);
  // Two passes over the lines keep for_each_line single-output.
  std::vector<double> l, h;
  for_each_line(v, lo, axis, [&](const std::vector<double>& x, std::vector<double>& out) {
    db2_analyze(x, l, h);
    out = l;
  });
  for_each_line(v, hi, axis, [&](const std::vector<double>& x, std::vector<double>& out) {
    db2_analyze(x, l, h);
    out = h;
  });
  return {std::move(lo), std::move(hi)};
}

Volume3D synthesize_axis(const Volume3D& lo, const Volume3D& hi, std::size_t axis, std::size_t n,
                         Spacing out_spacing) {
  Volume3D out(with_axis(lo.dims(), axis, n), out_spacing);
  const Dims dc = lo.dims();
  const std::array<std::size_t, 3> nc{dc.nx, dc.ny, dc.nz};
  const std::array<std::size_t, 3> sc{1, dc.nx, dc.nx * dc.ny};
  const Dims df = out.dims();
  const std::array<std::size_t, 3> sf{1, df.nx, df.nx * df.ny};
  const std::size_t a1 = axis == 0 ? 1 : 0;
  const std::size_t a2 = axis == 2 ? 1 : 2;
  std::vector<double> l(nc[axis]), h(nc[axis]), x;
  for (std::size_t j = 0; j < nc[a2]; ++j) {
    for (std::size_t i = 0; i < nc[a1]; ++i) {
      const std::size_t bc = i * sc[a1] + j * sc[a2];
      const std::size_t bf = i * sf[a1] + j * sf[a2];
      for (std::size_t k = 0; k < nc[axis]; ++k) {
        l[k] = lo[bc + k * sc[axis]];
        h[k] = hi[bc + k * sc[axis]];
      }
      db2_synthesize(l, h, n, x);
      for (std::size_t k = 0; k < n; ++k) out[bf + k * sf[axis]] = x[k];
    }
  }
  return out;
}

// Lowpass-only synthesis of one axis of a block. The block holds coarse
// samples [off, off + len) along `axis`; the result holds fine samples
// [new_off, new_off + new_len), clipped to [0, n_fine).
struct Block {
  std::array<std::size_t, 3> off{0, 0, 0};
  std::array<std::size_t, 3> len{0, 0, 0};
  std::vector<double> data;  // x fastest

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return x + len[0] * (y + len[1] * z); }
};

Block synth_block_axis(const Block& b, std::size_t axis, std::size_t n_fine) {
  const auto& h = Db2::lowpass;
  const long off = static_cast<long>(b.off[axis]);
  const long len = static_cast<long>(b.len[axis]);
  const long t0 = std::max(0L, 2 * off - 2);
  const long t1 = std::min(static_cast<long>(n_fine) - 1, 2 * (off + len - 1) + 1);
  Block out;
  out.off = b.off;
  out.len = b.len;
  out.off[axis] = static_cast<std::size_t>(t0);
  out.len[axis] = t1 >= t0 ? static_cast<std::size_t>(t1 - t0 + 1) : 0;
  out.data.assign(out.len[0] * out.len[1] * out.len[2], 0.0);
  if (out.data.empty()) return out;
  const std::array<std::size_t, 3> sb{1, b.len[0], b.len[0] * b.len[1]};
  const std::array<std::size_t, 3> so{1, out.len[0], out.len[0] * out.len[1]};
  const std::size_t a1 = axis == 0 ? 1 : 0;
  const std::size_t a2 = axis == 2 ? 1 : 2;
  for (std::size_t j = 0; j < b.len[a2]; ++j) {
    for (std::size_t i = 0; i < b.len[a1]; ++i) {
      const std::size_t base_b = i * sb[a1] + j * sb[a2];
      const std::size_t base_o = i * so[a1] + j * so[a2];
      for (long t = t0; t <= t1; ++t) {
        // o with 0 <= 2o + 1 - t <= 3.
        const long o_lo = std::max(off, (t - 1 + 1) / 2);
        const long o_hi = std::min(off + len - 1, (t + 2) / 2);
        double acc = 0.0;
        for (long o = o_lo; o <= o_hi; ++o) {
          const long jtap = 2 * o + 1 - t;
          if (jtap < 0 || jtap > 3) continue;
          acc += h[static_cast<std::size_t>(jtap)] * b.data[base_b + static_cast<std::size_t>(o - off) * sb[axis]];
        }
        out.data[base_o + static_cast<std::size_t>(t - t0) * so[axis]] = acc;
      }
    }
  }
  return out;
}

// Reconstructs the lowpass path of a coarse block through levels
// m-1 ... 1 and rescales by the DC gain.
Block upscale_block(Block b, int m, const std::vector<Dims>& chain) {
  for (int level = m - 1; level >= 1; --level) {
    const Dims& fine = chain[static_cast<std::size_t>(level - 1)];
    for (std::size_t axis = 0; axis < 3; ++axis) b = synth_block_axis(b, axis, fine[axis]);
  }
  const double g = lll_gain(m);
  for (double& v : b.data) v *= g;
  return b;
}

}  // namespace

const std::array<double, 4> Db2::lowpass{(1.0 + kSqrt3) / kNorm, (3.0 + kSqrt3) / kNorm, (3.0 - kSqrt3) / kNorm,
                                         (1.0 - kSqrt3) / kNorm};
const std::array<double, 4> Db2::highpass{(1.0 - kSqrt3) / kNorm, -(3.0 - kSqrt3) / kNorm, (3.0 + kSqrt3) / kNorm,
                                          -(1.0 + kSqrt3) / kNorm};

std::size_t db2_coarse_length(std::size_t n) {
  const std::size_t padded = n + (n % 2);
  return padded / 2 + 1;
}

void db2_analyze(const std::vector<double>& x, std::vector<double>& lo, std::vector<double>& hi) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("db2 analysis needs at least 2 samples");
  const std::size_t np = n + (n % 2);
  auto at = [&](long i) -> double {
    // Replicated pad sample for odd n, then half-sample symmetry.
    auto padded = [&](long k) { return x[static_cast<std::size_t>(std::min<long>(k, static_cast<long>(n) - 1))]; };
    const long N = static_cast<long>(np);
    if (i < 0) return padded(-i - 1);
    if (i >= N) return padded(2 * N - 1 - i);
    return padded(i);
  };
  const std::size_t nc = np / 2 + 1;
  lo.assign(nc, 0.0);
  hi.assign(nc, 0.0);
  const auto& h = Db2::lowpass;
  const auto& g = Db2::highpass;
  for (std::size_t o = 0; o < nc; ++o) {
    double a = 0.0, d = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double s = at(static_cast<long>(2 * o + 1) - static_cast<long>(j));
      a += h[j] * s;
      d += g[j] * s;
    }
    lo[o] = a;
    hi[o] = d;
  }
}

void db2_synthesize(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t n,
                    std::vector<double>& x) {
  if (lo.size() != hi.size() || lo.size() != db2_coarse_length(n)) {
    throw InvalidArgument("db2 synthesis: coefficient length does not match signal length");
  }
  const auto& h = Db2::lowpass;
  const auto& g = Db2::highpass;
  x.assign(n, 0.0);
  const long nc = static_cast<long>(lo.size());
  for (long t = 0; t < static_cast<long>(n); ++t) {
    double acc = 0.0;
    for (long o = std::max(0L, t / 2 - 1); o <= std::min(nc - 1, (t + 2) / 2); ++o) {
      const long j = 2 * o + 1 - t;
      if (j < 0 || j > 3) continue;
      acc += h[static_cast<std::size_t>(j)] * lo[static_cast<std::size_t>(o)] +
             g[static_cast<std::size_t>(j)] * hi[static_cast<std::size_t>(o)];
    }
    x[static_cast<std::size_t>(t)] = acc;
  }
}

Subbands dwt3_db2(const Volume3D& v) {
  const Dims d = v.dims();
  if (d.nx < 4 || d.ny < 4 || d.nz < 4) throw InvalidArgument("dwt3_db2: every dimension must be >= 4");
  Subbands s;
  s.input_dims = d;
  s.input_spacing = v.spacing();
  const Spacing sp = v.spacing();
  const Spacing sx{sp.x * 2, sp.y, sp.z}, sxy{sp.x * 2, sp.y * 2, sp.z}, sxyz = scaled_spacing(sp, 2.0);
  auto [L, H] = analyze_axis(v, 0, sx);
  std::array<Volume3D, 4> xy;
  {
    auto [LL, LH] = analyze_axis(L, 1, sxy);
    auto [HL, HH] = analyze_axis(H, 1, sxy);
    xy[0] = std::move(LL);  // low x, low y
    xy[1] = std::move(HL);  // high x, low y
    xy[2] = std::move(LH);  // low x, high y
    xy[3] = std::move(HH);
  }
  for (std::size_t b = 0; b < 4; ++b) {
    auto [lz, hz] = analyze_axis(xy[b], 2, sxyz);
    s.band[b] = std::move(lz);
    s.band[b + 4] = std::move(hz);
  }
  return s;
}

Volume3D idwt3_db2(const Subbands& s) {
  const Dims d = s.input_dims;
  const Spacing sp = s.input_spacing;
  for (const auto& b : s.band) {
    if (!(b.dims() == Dims{db2_coarse_length(d.nx), db2_coarse_length(d.ny), db2_coarse_length(d.nz)})) {
      throw InvalidArgument("idwt3_db2: subband dims inconsistent with input dims");
    }
  }
  const Spacing sx{sp.x * 2, sp.y, sp.z}, sxy{sp.x * 2, sp.y * 2, sp.z};
  std::array<Volume3D, 4> xy;
  for (std::size_t b = 0; b < 4; ++b) xy[b] = synthesize_axis(s.band[b], s.band[b + 4], 2, d.nz, sxy);
  const Volume3D L = synthesize_axis(xy[0], xy[2], 1, d.ny, sx);
  const Volume3D H = synthesize_axis(xy[1], xy[3], 1, d.ny, sx);
  return synthesize_axis(L, H, 0, d.nx, sp);
}

std::vector<Dims> scale_chain(Dims d, int m) {
  if (m < 1) throw InvalidArgument("scale index must be >= 1");
  std::vector<Dims> chain{d};
  for (int k = 1; k < m; ++k) {
    const Dims& p = chain.back();
    if (p.nx < 4 || p.ny < 4 || p.nz < 4) throw InvalidArgument("volume too small for the requested scale");
    chain.push_back({db2_coarse_length(p.nx), db2_coarse_length(p.ny), db2_coarse_length(p.nz)});
  }
  return chain;
}

ScaledImage scale_image(const Volume3D& F, int m) {
  ScaledImage out;
  out.scale = m;
  out.level_dims = scale_chain(F.dims(), m);
  out.original_spacing = F.spacing();
  out.volume = F;
  for (int k = 1; k < m; ++k) out.volume = dwt3_db2(out.volume).band[0];
  return out;
}

double lll_gain(int m) { return std::pow(2.0 * std::numbers::sqrt2, m - 1); }

BinaryMask downscale_mask(const BinaryMask& mask, int m) {
  Volume3D v(mask.dims(), mask.spacing());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i] ? 1.0 : 0.0;
  const ScaledImage s = scale_image(v, m);
  const double g = lll_gain(m);
  BinaryMask out(s.volume.dims(), s.volume.spacing(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.volume[i] / g >= 0.5 ? 1 : 0;
  return out;
}

BinaryMask upscale_mask(const BinaryMask& mask, int m, Dims original_dims, Spacing original_spacing) {
  const auto chain = scale_chain(original_dims, m);
  if (!(mask.dims() == chain.back())) throw InvalidArgument("upscale_mask: mask dims inconsistent with scale");
  if (m == 1) {
    BinaryMask out = mask;
    return BinaryMask(original_dims, original_spacing, std::move(out.storage()));
  }
  const Region r = upscale_region(Region::from_mask(mask), m, original_dims);
  return r.to_mask(original_spacing);
}

Region upscale_region(const Region& r, int m, Dims original_dims) {
  const auto chain = scale_chain(original_dims, m);
  if (!(r.dims() == chain.back())) throw InvalidArgument("upscale_region: region dims inconsistent with scale");
  if (m == 1 || r.empty()) return m == 1 ? r : Region(original_dims, {});
  const BoundingBox& bb = r.bbox();
  Block b;
  for (std::size_t a = 0; a < 3; ++a) {
    b.off[a] = bb.lo[a];
    b.len[a] = bb.extent(a);
  }
  b.data.assign(b.len[0] * b.len[1] * b.len[2], 0.0);
  const Dims& dc = r.dims();
  for (auto v : r.voxels()) {
    const std::size_t x = v % dc.nx, y = (v / dc.nx) % dc.ny, z = v / (dc.nx * dc.ny);
    b.data[b.index(x - b.off[0], y - b.off[1], z - b.off[2])] = 1.0;
  }
  const Block up = upscale_block(std::move(b), m, chain);
  std::vector<Region::Index> voxels;
  for (std::size_t z = 0; z < up.len[2]; ++z) {
    for (std::size_t y = 0; y < up.len[1]; ++y) {
      for (std::size_t x = 0; x < up.len[0]; ++x) {
        if (up.data[up.index(x, y, z)] >= 0.5) {
          const std::size_t gx = x + up.off[0], gy = y + up.off[1], gz = z + up.off[2];
          voxels.push_back(static_cast<Region::Index>(gx + original_dims.nx * (gy + original_dims.ny * gz)));
        }
      }
    }
  }
  return Region(original_dims, std::move(voxels));
}

}  // namespace siftcad
