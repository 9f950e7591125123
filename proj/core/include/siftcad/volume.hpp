#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "siftcad/error.hpp"

namespace siftcad {

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t operator[](std::size_t axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Voxel size in mm along x, y, z.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double operator[](std::size_t axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  double voxel_volume() const { return x * y * z; }
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Dense 3D grid, x fastest. Volume3D and BinaryMask are the two
/// instantiations used throughout the pipeline.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(Dims dims, Spacing spacing, T fill = T{}) : dims_(dims), spacing_(spacing), data_(dims.count(), fill) {
    validate();
  }

  Grid(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate();
    if (data_.size() != dims_.count()) {
      throw InvalidArgument("grid data length does not match dims");
    }
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return x + dims_.nx * (y + dims_.ny * z); }

  T& operator()(std::size_t x, std::size_t y, std::size_t z) { return data_[index(x, y, z)]; }
  const T& operator()(std::size_t x, std::size_t y, std::size_t z) const { return data_[index(x, y, z)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  std::array<std::size_t, 3> coords(std::size_t i) const {
    const std::size_t plane = dims_.nx * dims_.ny;
    return {i % dims_.nx, (i / dims_.nx) % dims_.ny, i / plane};
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void validate() const {
    if (spacing_.x <= 0.0 || spacing_.y <= 0.0 || spacing_.z <= 0.0) {
      throw InvalidArgument("spacing components must be positive");
    }
  }

  Dims dims_{};
  Spacing spacing_{};
  std::vector<T> data_;
};

using Volume3D = Grid<double>;
using BinaryMask = Grid<std::uint8_t>;

template <typename A, typename B>
bool same_geometry(const Grid<A>& a, const Grid<B>& b) {
  return a.dims() == b.dims() && a.spacing() == b.spacing();
}

template <typename A, typename B>
void require_same_geometry(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!same_geometry(a, b)) {
    throw GeometryMismatch(std::string(what) + ": dims/spacing mismatch");
  }
}

std::size_t count(const BinaryMask& mask);

BinaryMask empty_mask_like(const Volume3D& v);

/// Axis permutation. `order` holds 1-based axis indices, e.g. {1,3,2}
/// swaps y and z. Output axis k takes input axis order[k]-1.
template <typename T>
Grid<T> permute(const Grid<T>& v, std::array<int, 3> order);

extern template Grid<double> permute(const Grid<double>&, std::array<int, 3>);
extern template Grid<std::uint8_t> permute(const Grid<std::uint8_t>&, std::array<int, 3>);

/// Voxelwise a - b, unclamped.
Volume3D subtract(const Volume3D& a, const Volume3D& b);

/// Mean of v over the true voxels of mask. Throws on an empty mask.
double masked_mean(const Volume3D& v, const BinaryMask& mask);

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);

}  // namespace siftcad
