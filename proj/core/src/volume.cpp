#include "siftcad/volume.hpp"

#include <algorithm>
#include <numeric>

namespace siftcad {

std::size_t count(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.storage().begin(), mask.storage().end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

BinaryMask empty_mask_like(const Volume3D& v) { return BinaryMask(v.dims(), v.spacing(), 0); }

template <typename T>
Grid<T> permute(const Grid<T>& v, std::array<int, 3> order) {
  std::array<int, 3> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::array<int, 3>{1, 2, 3}) {
    throw InvalidArgument("permute: order must be a permutation of (1,2,3)");
  }
  const Dims& in = v.dims();
  const std::array<std::size_t, 3> in_dims{in.nx, in.ny, in.nz};
  const std::array<double, 3> in_sp{v.spacing().x, v.spacing().y, v.spacing().z};
  const std::array<std::size_t, 3> ax{static_cast<std::size_t>(order[0] - 1), static_cast<std::size_t>(order[1] - 1),
                                      static_cast<std::size_t>(order[2] - 1)};
  const Dims out_dims{in_dims[ax[0]], in_dims[ax[1]], in_dims[ax[2]]};
  const Spacing out_sp{in_sp[ax[0]], in_sp[ax[1]], in_sp[ax[2]]};
  Grid<T> out(out_dims, out_sp);

  // Stride in the input for a unit step along each output axis.
  const std::array<std::size_t, 3> in_stride{1, in.nx, in.nx * in.ny};
  const std::size_t s0 = in_stride[ax[0]];
  const std::size_t s1 = in_stride[ax[1]];
  const std::size_t s2 = in_stride[ax[2]];
  const auto src = v.data();
  auto dst = out.data();
  std::size_t o = 0;
  for (std::size_t k = 0; k < out_dims.nz; ++k) {
    for (std::size_t j = 0; j < out_dims.ny; ++j) {
      std::size_t base = k * s2 + j * s1;
      for (std::size_t i = 0; i < out_dims.nx; ++i) {
        dst[o++] = src[base + i * s0];
      }
    }
  }
  return out;
}

template Grid<double> permute(const Grid<double>&, std::array<int, 3>);
template Grid<std::uint8_t> permute(const Grid<std::uint8_t>&, std::array<int, 3>);

Volume3D subtract(const Volume3D& a, const Volume3D& b) {
  require_same_geometry(a, b, "subtract");
  Volume3D out(a.dims(), a.spacing());
  const auto pa = a.data();
  const auto pb = b.data();
  auto po = out.data();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

double masked_mean(const Volume3D& v, const BinaryMask& mask) {
  require_same_geometry(v, mask, "masked_mean");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) {
      sum += v[i];
      ++n;
    }
  }
  if (n == 0) throw DegenerateInput("masked_mean: empty mask");
  return sum / static_cast<double>(n);
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b, "mask_and");
  BinaryMask out(a.dims(), a.spacing());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b, "mask_or");
  BinaryMask out(a.dims(), a.spacing());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

}  // namespace siftcad
