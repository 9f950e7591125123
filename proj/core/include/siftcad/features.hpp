#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "siftcad/breast_case.hpp"
#include "siftcad/candidates.hpp"
#include "siftcad/region.hpp"

namespace siftcad {

/// Named feature values in a fixed schema order.
struct FeatureVector {
  std::string schema;
  std::vector<std::string> names;
  std::vector<double> values;

  void add(std::string name, double v) {
    names.push_back(std::move(name));
    values.push_back(v);
  }
  void append(const FeatureVector& o);
  std::size_t size() const { return values.size(); }
  /// Throws InvalidArgument for an unknown name.
  double get(const std::string& name) const;
};

/// Schema id for a number of DCE frames; margin features are per frame.
std::string feature_schema_id(std::size_t dce_frames);
/// Frozen feature names, in extraction order.
std::vector<std::string> feature_schema(std::size_t dce_frames);

/// Squared Euclidean distance (mm^2) from every voxel to the nearest voxel
/// with feature[i] != 0; +inf if there is none.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, Dims dims, Spacing spacing);

struct Shell {
  double inner_mm = 0.0;
  double outer_mm = 0.0;
  Region mask;
  bool empty() const { return mask.empty(); }
};

/// Voxels whose signed distance to the region surface lies in
/// [-inner_mm, +outer_mm]. The surface is sampled at the centres of the
/// faces between region and background voxels and the distance field is
/// smoothed by a 3x3x3 mean before thresholding.
Shell shell_mask(const Region& r, double inner_mm, double outer_mm, Spacing spacing);
/// Region voxels at least depth_mm inside the surface.
Region erode_region(const Region& r, double depth_mm, Spacing spacing);

/// Linear interpolation between order statistics, p in [0, 100].
double percentile(std::vector<double> values, double p);

struct Moments {
  double mean = 0, std = 0, skewness = 0, kurtosis = 0;  ///< population moments; kurtosis non-excess
};
Moments moments(const std::vector<double>& values);

std::vector<double> sample(const Volume3D& v, const Region& r);

/// The 13 Haralick statistics of a pooled, symmetric GLCM:
/// 32 levels, region-local min-max quantization, 13 offsets at distance 1.
constexpr std::size_t kHaralickLevels = 32;
extern const std::array<const char*, 13> kHaralickNames;
std::array<double, 13> haralick(const Volume3D& v, const Region& r, bool* single_voxel = nullptr);
/// Normalized symmetric co-occurrence matrix (row-major, levels^2).
std::vector<double> glcm(const Volume3D& v, const Region& r);
std::array<double, 13> haralick_from_glcm(const std::vector<double>& p, std::size_t levels);

/// Mean gradient magnitude (central differences, per mm) over the 3 mm
/// shell (1 mm in, 2 mm out).
double margin_sharpness(const Volume3D& v, const Region& r, bool* empty_shell = nullptr);
/// Gradient-weighted mean cosine between the gradient and the outward
/// direction from the region centroid over the same shell:
/// sum(g . u) / sum(|g|). A bright blob on a dark background gives -1.
double radial_gradient_index(const Volume3D& v, const Region& r, bool* empty_shell = nullptr);

struct ShapeFeatures {
  double esd = 0, extent = 0, solidity = 0, irregularity = 0, fat_fraction = 0;
};
/// Digital convex hull volume (mm^3): voxels whose centres lie in the convex
/// hull of the region's voxel centres. A digitally convex region gives its
/// own volume.
double convex_hull_volume(const Region& r, Spacing spacing);
/// Spacing-weighted count of faces between the region and the rest,
/// times 2/3 (the mean face-count overestimate for random orientations).
double surface_area(const Region& r, Spacing spacing);
/// `volume_mm3` defines the ESD; pass the candidate's physical volume.
ShapeFeatures shape_features(const Region& r, Spacing spacing, double volume_mm3, const BinaryMask* fat);

struct CurveFeatures {
  double peak = 0, time_to_peak = 0, uptake = 0, washout = 0;
};
/// Peak, time to peak, E_1 / t_1 and (E_peak - E_last) / (t_last - t_peak).
/// curve[0] is the pre-contrast point.
CurveFeatures curve_features(const std::vector<double>& curve, const std::vector<double>& times);

struct ParametricFit {
  double A = 0, alpha = 0, beta = 0, rmse = 0;
  bool fallback = false;  ///< refinement failed; coarse grid values
};
/// Least squares E(t) = A (1 - exp(-alpha t)) exp(-beta t).
ParametricFit fit_enhancement(const std::vector<double>& curve, const std::vector<double>& times);

/// Case sequences resampled once per scale: T1, T2, DCE_0 normalized to the
/// fat mean, every DCE frame normalized to the DCE_0 fat mean, DCE_1 - DCE_0,
/// masks. Scaled intensities are divided by the lowpass DC gain.
struct ScaledSequences {
  int scale = 1;
  Volume3D t1, t2, dce0;
  std::vector<Volume3D> dce;
  Volume3D subtraction;
  BinaryMask breast, fat;
};

class FeatureContext {
 public:
  /// Builds scales 1..max_scale. Throws if a sequence is missing.
  FeatureContext(const BreastCase& c, int max_scale);
  const BreastCase& breast_case() const { return *case_; }
  const ScaledSequences& at(int m) const;
  std::size_t dce_frames() const { return case_->dce.size(); }

 private:
  const BreastCase* case_;
  std::vector<ScaledSequences> scales_;
};

FeatureVector intensity_features(const RegionCandidate& rc, const FeatureContext& ctx);
FeatureVector haralick_features(const RegionCandidate& rc, const FeatureContext& ctx);
FeatureVector margin_features(const RegionCandidate& rc, const FeatureContext& ctx);
FeatureVector morphology_features(const RegionCandidate& rc, const FeatureContext& ctx);
/// Computed on the candidate upscaled to the original grid, using the raw
/// DCE frames.
FeatureVector kinetic_features(const RegionCandidate& rc, const FeatureContext& ctx);
/// All groups in schema order.
FeatureVector extract_all(const RegionCandidate& rc, const FeatureContext& ctx);
/// One vector per candidate; runs across candidates in parallel.
std::vector<FeatureVector> extract_features(const std::vector<RegionCandidate>& cands, const FeatureContext& ctx);

struct FeatureRow {
  std::string case_id;
  std::size_t candidate_id = 0;
  CandidateLabel label = CandidateLabel::Unlabeled;
  FeatureVector features;
};
void write_feature_csv(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);

}  // namespace siftcad
