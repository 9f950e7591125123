#pragma once

#include <array>
#include <vector>

#include "siftcad/region.hpp"
#include "siftcad/volume.hpp"

namespace siftcad {

/// Daubechies-2 analysis pair. Lowpass
///   h = [1+sqrt3, 3+sqrt3, 3-sqrt3, 1-sqrt3] / (4 sqrt2)
///     = [0.4829629131445341, 0.8365163037378079, 0.2241438680420134, -0.1294095225512604]
/// and highpass g[k] = (-1)^k h[3-k]
///     = [-0.1294095225512604, -0.2241438680420134, 0.8365163037378079, -0.4829629131445341].
/// Synthesis uses the same taps (orthogonal filter bank).
struct Db2 {
  static const std::array<double, 4> lowpass;
  static const std::array<double, 4> highpass;
};

/// Length of one analysis level: an odd length is first padded with one
/// replicated sample, then n_pad/2 + 1 coefficients are produced
/// (half-sample symmetric extension supplies the filter overhang).
std::size_t db2_coarse_length(std::size_t n);

/// a[o] = sum_j h[j] x[2o+1-j] with x[-1]=x[0], x[-2]=x[1], x[n]=x[n-1],
/// x[n+1]=x[n-2]. Exposed for testing.
void db2_analyze(const std::vector<double>& x, std::vector<double>& lo, std::vector<double>& hi);
/// Inverse of db2_analyze for a signal of length n.
void db2_synthesize(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t n,
                    std::vector<double>& x);

/// Eight subbands of a single 3D level. Index bit 0/1/2 set means highpass
/// along x/y/z, so band[0] is LLL and band[7] is HHH.
struct Subbands {
  std::array<Volume3D, 8> band;
  Dims input_dims;
  Spacing input_spacing;

  const Volume3D& lll() const { return band[0]; }
};

Subbands dwt3_db2(const Volume3D& v);
Volume3D idwt3_db2(const Subbands& s);

/// Volume at scale m (1 = original) with the dims of every level used to
/// get there.
struct ScaledImage {
  int scale = 1;
  Volume3D volume;
  std::vector<Dims> level_dims;  ///< level_dims[0] = original dims, ... [m-1] = volume dims
  Spacing original_spacing;
};

/// Dims at scale m for a volume of dims d; throws if some level would drop
/// below 4 samples along an axis.
std::vector<Dims> scale_chain(Dims d, int m);

/// m = 1 returns F; otherwise the LLL subband of m-1 recursive levels.
/// Spacing doubles per level.
ScaledImage scale_image(const Volume3D& F, int m);

/// Overall DC gain of the LLL path after m-1 levels, (2 sqrt2)^(m-1).
double lll_gain(int m);

/// Mask at scale m: LLL of the 0/1 mask divided by the gain, >= 0.5.
BinaryMask downscale_mask(const BinaryMask& mask, int m);

/// Treats the scale-m mask as an LLL band with zero details, runs m-1
/// synthesis levels, crops to the original dims, multiplies by the DC gain
/// and keeps values >= 0.5. A full mask maps to a full mask.
BinaryMask upscale_mask(const BinaryMask& mask, int m, Dims original_dims, Spacing original_spacing);

/// Same as upscale_mask for a sparse region; only the block the region can
/// influence is reconstructed.
Region upscale_region(const Region& r, int m, Dims original_dims);

}  // namespace siftcad
