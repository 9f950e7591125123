#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "siftcad/error.hpp"

namespace siftcad {

/// Dense 2D slice, x fastest.
struct Image2D {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> data;

  Image2D() = default;
  Image2D(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), data(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return data[x + width * y]; }
  double at(std::size_t x, std::size_t y) const { return data[x + width * y]; }
  bool empty() const { return data.empty(); }
  friend bool operator==(const Image2D&, const Image2D&) = default;
};

struct Offset2D {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset2D&, const Offset2D&) = default;
  friend auto operator<=>(const Offset2D&, const Offset2D&) = default;
};

using StructuringElement = std::vector<Offset2D>;

/// Discrete line of ceil(magnitude) points, bumped to the next odd count,
/// centered on the origin and oriented at `theta` (radians, taken mod pi).
/// Along the dominant axis the points are k = -r..r; the minor coordinate
/// is k*tan (or k*cot) rounded half away from zero, so the set is point
/// symmetric and theta, theta+pi give the same line. Sorted.
StructuringElement rasterize_lse(double magnitude, double theta);

/// Erosion: min of f(p + o) over SE offsets o. Samples falling outside the
/// slice are skipped. Because every SE must contain the origin each output
/// pixel sees at least itself.
///
/// Skipping (rather than clamping to the nearest edge pixel) keeps erosion
/// and dilation an adjoint pair for oblique lines, so the opening stays
/// anti-extensive and idempotent up to the border. For axis-aligned lines
/// the two conventions produce identical results.
Image2D gray_erode(const Image2D& f, std::span<const Offset2D> se);

/// Dilation: max of f(p - o) over SE offsets o, out-of-slice samples skipped.
Image2D gray_dilate(const Image2D& f, std::span<const Offset2D> se);

Image2D gray_open(const Image2D& f, std::span<const Offset2D> se);

/// Precomputed decomposition of an SE into runs along x (or along y, when
/// that gives fewer runs). Reusable across slices of equal size.
class LineFilter {
 public:
  explicit LineFilter(std::span<const Offset2D> se);

  void erode(const Image2D& f, Image2D& out) const;
  void dilate(const Image2D& f, Image2D& out) const;
  void open(const Image2D& f, Image2D& out) const;

  std::size_t run_count() const { return runs_.size(); }
  bool transposed() const { return transposed_; }

 private:
  struct Run {
    int start = 0;  ///< first offset along the run axis
    int length = 1;
    int cross = 0;  ///< constant offset on the other axis
  };
  void erode_rows(const double* src, std::size_t w, std::size_t h, double* dst, bool negate) const;
  void apply(const Image2D& f, Image2D& out, bool dilate) const;

  std::vector<Run> runs_;
  std::vector<int> widths_;  ///< distinct run lengths
  bool transposed_ = false;
};

}  // namespace siftcad
