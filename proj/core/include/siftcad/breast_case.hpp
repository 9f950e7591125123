#pragma once

#include <string>
#include <utility>
#include <vector>

#include "siftcad/volume.hpp"

namespace siftcad {

enum class Side { Left, Right };

const char* side_name(Side s);
Side parse_side(const std::string& s);

/// One side of one examination. All volumes are co-registered on a common
/// grid; `ground_truth[i]` and `malignant[i]` describe lesion i.
struct BreastCase {
  std::string id;
  std::string patient_id;
  Side side = Side::Left;
  Volume3D t1;
  Volume3D t2;
  std::vector<Volume3D> dce;
  std::vector<double> acquisition_times;
  BinaryMask breast_mask;
  BinaryMask fat_mask;
  std::vector<BinaryMask> ground_truth;
  std::vector<bool> malignant;

  const Dims& dims() const { return t1.dims(); }
  const Spacing& spacing() const { return t1.spacing(); }

  /// Throws on any violated invariant: shared geometry, >= 2 DCE frames,
  /// strictly increasing times, one malignancy flag per lesion.
  void validate() const;
};

/// Foreground = T1 above its Otsu threshold, largest 26-connected component,
/// holes filled slice by slice.
BinaryMask breast_mask(const Volume3D& t1);

/// Partition at the midline of the mask's x bounding box:
/// left = x < midline, right = x >= midline.
std::pair<BinaryMask, BinaryMask> split_breasts(const BinaryMask& mask);

/// Voxels of `breast` whose T1 value reaches the Otsu threshold computed
/// inside the breast (fat is bright on non-fat-suppressed T1).
BinaryMask fat_mask(const Volume3D& t1, const BinaryMask& breast);

/// v divided by its mean over `fat`.
Volume3D normalize_to_fat(const Volume3D& v, const BinaryMask& fat);

}  // namespace siftcad
