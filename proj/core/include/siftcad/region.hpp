#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "siftcad/volume.hpp"

namespace siftcad {

/// Inclusive voxel-index bounding box.
struct BoundingBox {
  std::array<std::size_t, 3> lo{0, 0, 0};
  std::array<std::size_t, 3> hi{0, 0, 0};

  std::size_t extent(std::size_t axis) const { return hi[axis] - lo[axis] + 1; }
  std::size_t voxel_count() const { return extent(0) * extent(1) * extent(2); }
  bool intersects(const BoundingBox& o) const {
    for (std::size_t a = 0; a < 3; ++a) {
      if (hi[a] < o.lo[a] || o.hi[a] < lo[a]) return false;
    }
    return true;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Sparse voxel set on a fixed grid: sorted, unique linear indices. This is
/// how candidates carry their BinaryMask without a dense copy per region.
class Region {
 public:
  using Index = std::uint32_t;

  Region() = default;
  /// `voxels` must be sorted and unique.
  Region(Dims dims, std::vector<Index> voxels);

  static Region from_mask(const BinaryMask& mask);

  const Dims& dims() const { return dims_; }
  std::span<const Index> voxels() const { return voxels_; }
  std::size_t size() const { return voxels_.size(); }
  bool empty() const { return voxels_.empty(); }
  const BoundingBox& bbox() const { return bbox_; }

  BinaryMask to_mask(Spacing spacing) const;
  /// Sets the region's voxels to 1 in an existing mask of the same dims.
  void paint(BinaryMask& mask) const;

  /// [start, length] runs of consecutive linear indices.
  std::vector<std::pair<Index, Index>> run_lengths() const;
  static Region from_run_lengths(Dims dims, std::span<const std::pair<Index, Index>> runs);

  friend bool operator==(const Region& a, const Region& b) { return a.dims_ == b.dims_ && a.voxels_ == b.voxels_; }

 private:
  Dims dims_{};
  std::vector<Index> voxels_;
  BoundingBox bbox_{};
};

std::size_t intersection_size(const Region& a, const Region& b);
bool overlaps(const Region& a, const Region& b);

/// 26-connected components ordered by their first voxel in raster order.
std::vector<Region> connected_components(const BinaryMask& mask);

/// Keeps the largest 26-connected component (first one on ties).
BinaryMask largest_component(const BinaryMask& mask);

/// Fills background pockets not reachable from the slice border, per axial
/// slice, with 4-connected flood fill.
BinaryMask fill_holes_axial(const BinaryMask& mask);

}  // namespace siftcad
