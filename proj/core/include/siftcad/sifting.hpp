#pragma once

#include <array>
#include <cstddef>

#include "siftcad/morphology.hpp"
#include "siftcad/volume.hpp"

namespace siftcad {

/// Short/long line lengths, in pixels, for one slicing direction.
struct MagnitudePair {
  double ml1 = 0.0;
  double ml2 = 0.0;
};

enum class View { Axial = 0, Sagittal = 1, Coronal = 2 };

struct MagnitudePlan {
  MagnitudePair axial;
  MagnitudePair sagittal;
  MagnitudePair coronal;
  double ml1_mm = 0.0;  ///< ML'_1, the smallest lesion diameter
  double ml2_mm = 0.0;  ///< ML'_2, largest diameter divided by 2^(M-1)
  double v_min = 0.0;
  double v_max = 0.0;
  int scales = 1;

  const MagnitudePair& view(View v) const {
    return v == View::Axial ? axial : v == View::Sagittal ? sagittal : coronal;
  }
};

/// Line lengths from the lesion volume range [v_min, v_max] (mm^3), in-plane
/// spacing d and slice spacing D (mm), and M scales. The long line only has
/// to cover the largest lesion once it has been shrunk by 2^(M-1), since the
/// coarsest scale sees it at that size. In the sagittal and coronal planes
/// the short line is measured with the coarser of the two spacings, so it
/// never spans more than the smallest lesion along either axis.
MagnitudePlan lse_magnitudes(double v_min, double v_max, double d, double D, int M);

/// Volume of a sphere of the given diameter.
double sphere_volume(double diameter_mm);

/// Morphological sifting of one slice: for theta_n = n*pi/N,
///   sum_n open(f - open(f, L(ml2, theta_n)), L(ml1, theta_n)).
/// Keeps bright structures longer than ml1 but shorter than ml2 in every
/// direction.
Image2D ms2d(const Image2D& f, double ml1, double ml2, int N);

/// Sifting along the three slicing directions, summed as
/// (axial + sagittal) + coronal. Sagittal slices are (x, z) planes and
/// coronal slices (z, y) planes, obtained by permuting (1,3,2) and (3,2,1).
Volume3D ms3d(const Volume3D& f, const MagnitudePlan& plan, int N);

/// One directional term of ms3d, such as the axial response alone.
Volume3D ms3d_view(const Volume3D& f, const MagnitudePair& pair, View view, int N);

/// Affine map of the masked voxels onto [0, 65535]; outside voxels are 0,
/// and a constant masked region maps to 0.
Volume3D normalize16(const Volume3D& f, const BinaryMask& mask);

}  // namespace siftcad
