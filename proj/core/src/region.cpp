#include "siftcad/region.hpp"

#include <algorithm>
#include <limits>

namespace siftcad {
namespace {

BoundingBox compute_bbox(const Dims& dims, std::span<const Region::Index> voxels) {
  BoundingBox b;
  if (voxels.empty()) return b;
  const std::size_t plane = dims.nx * dims.ny;
  b.lo = {std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max(),
          std::numeric_limits<std::size_t>::max()};
  for (auto v : voxels) {
    const std::array<std::size_t, 3> c{v % dims.nx, (v / dims.nx) % dims.ny, v / plane};
    for (std::size_t a = 0; a < 3; ++a) {
      b.lo[a] = std::min(b.lo[a], c[a]);
      b.hi[a] = std::max(b.hi[a], c[a]);
    }
  }
  return b;
}

void check_index_range(const Dims& dims) {
  if (dims.count() > std::numeric_limits<Region::Index>::max()) {
    throw InvalidArgument("region: grid too large for 32-bit voxel indices");
  }
}

}  // namespace

Region::Region(Dims dims, std::vector<Index> voxels) : dims_(dims), voxels_(std::move(voxels)) {
  check_index_range(dims_);
  bbox_ = compute_bbox(dims_, voxels_);
}

Region Region::from_mask(const BinaryMask& mask) {
  check_index_range(mask.dims());
  std::vector<Index> voxels;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) voxels.push_back(static_cast<Index>(i));
  }
  return Region(mask.dims(), std::move(voxels));
}

BinaryMask Region::to_mask(Spacing spacing) const {
  BinaryMask m(dims_, spacing, 0);
  paint(m);
  return m;
}

void Region::paint(BinaryMask& mask) const {
  if (!(mask.dims() == dims_)) throw GeometryMismatch("region paint: dims mismatch");
  for (auto v : voxels_) mask[v] = 1;
}

std::vector<std::pair<Region::Index, Region::Index>> Region::run_lengths() const {
  std::vector<std::pair<Index, Index>> runs;
  for (std::size_t i = 0; i < voxels_.size();) {
    std::size_t j = i + 1;
    while (j < voxels_.size() && voxels_[j] == voxels_[j - 1] + 1) ++j;
    runs.emplace_back(voxels_[i], static_cast<Index>(j - i));
    i = j;
  }
  return runs;
}

Region Region::from_run_lengths(Dims dims, std::span<const std::pair<Index, Index>> runs) {
  std::vector<Index> voxels;
  for (const auto& [start, len] : runs) {
    if (static_cast<std::size_t>(start) + len > dims.count()) throw FormatError("region: run exceeds grid");
    if (!voxels.empty() && start <= voxels.back()) throw FormatError("region: runs must be sorted and disjoint");
    for (Index k = 0; k < len; ++k) voxels.push_back(start + k);
  }
  return Region(dims, std::move(voxels));
}

std::size_t intersection_size(const Region& a, const Region& b) {
  if (!(a.dims() == b.dims())) throw GeometryMismatch("region intersection: dims mismatch");
  if (a.empty() || b.empty() || !a.bbox().intersects(b.bbox())) return 0;
  auto va = a.voxels();
  auto vb = b.voxels();
  std::size_t i = 0, j = 0, n = 0;
  while (i < va.size() && j < vb.size()) {
    if (va[i] < vb[j]) {
      ++i;
    } else if (vb[j] < va[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

bool overlaps(const Region& a, const Region& b) {
  if (!(a.dims() == b.dims())) throw GeometryMismatch("region overlap: dims mismatch");
  if (a.empty() || b.empty() || !a.bbox().intersects(b.bbox())) return false;
  auto va = a.voxels();
  auto vb = b.voxels();
  std::size_t i = 0, j = 0;
  while (i < va.size() && j < vb.size()) {
    if (va[i] < vb[j]) {
      ++i;
    } else if (vb[j] < va[i]) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

std::vector<Region> connected_components(const BinaryMask& mask) {
  const Dims d = mask.dims();
  check_index_range(d);
  const std::size_t n = mask.size();
  std::vector<std::uint8_t> visited(n, 0);
  std::vector<Region::Index> stack;
  std::vector<Region> out;
  const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(d.nx);
  const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(d.ny);
  const std::ptrdiff_t nz = static_cast<std::ptrdiff_t>(d.nz);

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!mask[seed] || visited[seed]) continue;
    std::vector<Region::Index> voxels;
    visited[seed] = 1;
    stack.push_back(static_cast<Region::Index>(seed));
    while (!stack.empty()) {
      const Region::Index v = stack.back();
      stack.pop_back();
      voxels.push_back(v);
      const std::ptrdiff_t x = v % nx;
      const std::ptrdiff_t y = (v / nx) % ny;
      const std::ptrdiff_t z = v / (nx * ny);
      for (std::ptrdiff_t dz = -1; dz <= 1; ++dz) {
        const std::ptrdiff_t zz = z + dz;
        if (zz < 0 || zz >= nz) continue;
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
          const std::ptrdiff_t yy = y + dy;
          if (yy < 0 || yy >= ny) continue;
          for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            const std::ptrdiff_t xx = x + dx;
            if (xx < 0 || xx >= nx) continue;
            const std::size_t u = static_cast<std::size_t>(xx + nx * (yy + ny * zz));
            if (mask[u] && !visited[u]) {
              visited[u] = 1;
              stack.push_back(static_cast<Region::Index>(u));
            }
          }
        }
      }
    }
    std::sort(voxels.begin(), voxels.end());
    out.emplace_back(d, std::move(voxels));
  }
  return out;
}

BinaryMask largest_component(const BinaryMask& mask) {
  auto comps = connected_components(mask);
  BinaryMask out(mask.dims(), mask.spacing(), 0);
  if (comps.empty()) return out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (comps[i].size() > comps[best].size()) best = i;
  }
  comps[best].paint(out);
  return out;
}

BinaryMask fill_holes_axial(const BinaryMask& mask) {
  const Dims d = mask.dims();
  BinaryMask out = mask;
  std::vector<std::uint8_t> outside(d.nx * d.ny);
  std::vector<std::size_t> stack;
  for (std::size_t z = 0; z < d.nz; ++z) {
    std::fill(outside.begin(), outside.end(), 0);
    auto bg = [&](std::size_t x, std::size_t y) { return !mask(x, y, z); };
    auto push = [&](std::size_t x, std::size_t y) {
      const std::size_t i = x + d.nx * y;
      if (!outside[i] && bg(x, y)) {
        outside[i] = 1;
        stack.push_back(i);
      }
    };
    for (std::size_t x = 0; x < d.nx; ++x) {
      push(x, 0);
      push(x, d.ny - 1);
    }
    for (std::size_t y = 0; y < d.ny; ++y) {
      push(0, y);
      push(d.nx - 1, y);
    }
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % d.nx;
      const std::size_t y = i / d.nx;
      if (x > 0) push(x - 1, y);
      if (x + 1 < d.nx) push(x + 1, y);
      if (y > 0) push(x, y - 1);
      if (y + 1 < d.ny) push(x, y + 1);
    }
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (!outside[x + d.nx * y]) out(x, y, z) = 1;
      }
    }
  }
  return out;
}

}  // namespace siftcad
