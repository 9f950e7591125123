#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "siftcad/volume.hpp"

namespace siftcad {

/// Uniform histogram over [lo, hi]; bin k covers [lo + k*w, lo + (k+1)*w),
/// with hi itself falling in the last bin.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  /// Lower edge of bin k, i.e. the value a threshold "after bin k-1" maps to.
  double edge(std::size_t k) const { return lo + static_cast<double>(k) * bin_width(); }
};

/// Histogram of the voxels selected by `mask` (all voxels when null).
/// Throws DegenerateInput when the selection is empty or constant.
Histogram masked_histogram(const Volume3D& v, const BinaryMask* mask, std::size_t bins = 256);

/// Classical Otsu on bin counts: index k maximizing the between-class
/// variance of {0..k} vs {k+1..L-1}. First maximum wins, then a cut lying
/// in a run of empty bins is moved to the middle of that run (the variance
/// is flat across it).
std::size_t otsu_index(std::span<const double> counts);

/// Otsu threshold over a 256-bin histogram of the masked voxels. Voxels
/// strictly above the returned value form the upper class.
double otsu_threshold(const Volume3D& v);
double otsu_threshold(const Volume3D& v, const BinaryMask& mask);

/// Multilevel Otsu on bin counts. Returns T strictly increasing class
/// boundary indices t_1 < ... < t_T (class j spans bins (t_{j-1}, t_j]).
///
/// Between-class variance is maximized through the equivalent objective
/// sum_k S_k^2 / P_k, where P and S are the zeroth and first moments of each
/// class. P(u,v) and S(u,v) come from a lookup table built by the
/// recurrence P(u,v) = P(u,v-1) + p_v, and the maximization over all
/// threshold vectors is solved exactly by dynamic programming over that
/// table (the objective is a sum of independent per-class terms). Ties
/// resolve as in otsu_index.
std::vector<std::size_t> multilevel_otsu_indices(std::span<const double> counts, std::size_t levels);

struct ThresholdSet {
  std::vector<double> values;             ///< Th_1 < ... < Th_T in data units.
  std::vector<std::size_t> bin_indices;   ///< class boundaries on the histogram
  Histogram histogram;
};

/// Multilevel Otsu over a 256-bin histogram of the masked voxels.
/// Requires at least T+1 distinct masked values.
ThresholdSet multilevel_otsu(const Volume3D& v, const BinaryMask& mask, std::size_t levels, std::size_t bins = 256);

/// Voxel true iff v >= threshold.
BinaryMask binarize(const Volume3D& v, double threshold);

}  // namespace siftcad
