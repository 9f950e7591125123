#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "siftcad/breast_case.hpp"
#include "siftcad/region.hpp"
#include "siftcad/sifting.hpp"
#include "siftcad/threshold.hpp"
#include "siftcad/wavelet.hpp"

namespace siftcad {

struct CandidateParams {
  int M = 3;   ///< number of scales
  int N = 10;  ///< orientations per sifting pass
  int T = 16;  ///< thresholds per scale
  double v_min = sphere_volume(4.0);
  double v_max = sphere_volume(63.0);
};

enum class CandidateLabel { Unlabeled, Positive, Negative, Neutral };
const char* label_name(CandidateLabel l);

struct RegionCandidate {
  std::size_t id = 0;
  int scale = 1;
  int threshold_index = 0;  ///< 1-based t of Th_t
  Region region;            ///< voxels on the scale-m grid
  Spacing spacing;          ///< scale-m voxel size
  double physical_volume = 0.0;
  std::array<double, 3> centroid_mm{0, 0, 0};
  double lesion_score = -1.0;      ///< unset while negative
  double malignancy_score = -1.0;  ///< unset while negative
  CandidateLabel label = CandidateLabel::Unlabeled;
};

/// Original-grid position (in voxel units) of a scale-m sample index; the
/// db2 lowpass has its centroid 0.634 samples behind the output tap.
double coarse_to_fine(double o, int m);

/// Volume window for scale m (mm^3): scale 1 takes [v_min, v_max / 8^(M-1)],
/// scale m > 1 takes [v_max / 8^(M-m+1), v_max]. Inclusive bounds.
bool size_sieve(double volume, int m, int M, double v_min, double v_max);

/// Everything computed at one scale; filled when a trace is requested.
struct ScaleTrace {
  int scale = 1;
  Volume3D response;    ///< ms3d output on the scaled subtraction image
  Volume3D normalized;  ///< 16-bit normalization within the scaled breast
  BinaryMask breast;
  ThresholdSet thresholds;
  std::size_t components = 0;
  std::size_t kept = 0;
};

/// Region candidate generation by 3D multiscale sifting: per scale, sift the
/// scaled DCE1 - DCE0 image, normalize within the breast, threshold at T
/// multilevel Otsu levels, split into 26-connected components and keep
/// those inside the scale's volume window. Identical voxel sets at one scale
/// are kept once, with the smallest threshold index.
std::vector<RegionCandidate> generate_candidates(const BreastCase& c, const CandidateParams& p,
                                                 std::vector<ScaleTrace>* trace = nullptr);

/// Pluggable candidate source for baseline comparisons.
class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;
  virtual std::string name() const = 0;
  virtual std::vector<RegionCandidate> generate(const BreastCase& c) const = 0;
};

class SiftingGenerator : public CandidateGenerator {
 public:
  explicit SiftingGenerator(CandidateParams p = {}) : params_(p) {}
  std::string name() const override { return "sifting"; }
  std::vector<RegionCandidate> generate(const BreastCase& c) const override { return generate_candidates(c, params_); }

 private:
  CandidateParams params_;
};

/// Reference baseline: 1D k-means on the subtraction image inside the breast
/// (clusters seeded at evenly spaced quantiles), candidates = 26-connected
/// components of "cluster >= j" for j = 1..k-1, filtered to [v_min, v_max].
class KMeansGenerator : public CandidateGenerator {
 public:
  explicit KMeansGenerator(int k = 5, double v_min = sphere_volume(4.0), double v_max = sphere_volume(63.0))
      : k_(k), v_min_(v_min), v_max_(v_max) {}
  std::string name() const override { return "kmeans"; }
  std::vector<RegionCandidate> generate(const BreastCase& c) const override;

 private:
  int k_;
  double v_min_, v_max_;
};

std::unique_ptr<CandidateGenerator> make_generator(const std::string& name, const CandidateParams& p);

/// Candidate region on the original grid (upscaled when m > 1).
Region original_region(const RegionCandidate& rc, Dims original_dims);

/// JSON list with per-candidate provenance, volume, bounding box,
/// run-length-encoded voxels and scores.
void save_candidates(const std::vector<RegionCandidate>& cands, const std::string& case_id,
                     const std::filesystem::path& path);
std::vector<RegionCandidate> load_candidates(const std::filesystem::path& path, std::string* case_id = nullptr);

}  // namespace siftcad
