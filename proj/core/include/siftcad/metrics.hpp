#pragma once

#include <string>
#include <vector>

#include "siftcad/region.hpp"
#include "siftcad/volume.hpp"

namespace siftcad {

/// Dice similarity 2|a & b| / (|a| + |b|); 1 when both are empty. Throws
/// GeometryMismatch on differing dims.
double dsi(const BinaryMask& a, const BinaryMask& b);
double dsi(const Region& a, const Region& b);

/// A classified region on the original grid.
struct Detection {
  Region mask;
  double lesion_score = 0.0;
  double malignancy_score = 0.0;
  bool malignant = false;  ///< malignancy_score >= the malignancy threshold
  int scale = 1;
  int threshold_index = 0;
  std::size_t candidate_id = 0;
  double volume_mm3 = 0.0;
};

/// Connected groups of the overlap graph (an edge per pair sharing a voxel)
/// each reduced to one detection: highest lesion score, then larger volume,
/// then lower scale, then lower candidate id. Output keeps input order.
std::vector<Detection> fuse_labels(const std::vector<Detection>& detections);

/// Ground truth of one case.
struct CaseTruth {
  std::string patient_id;
  std::vector<Region> lesions;
  std::vector<bool> malignant;
};

struct FrocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpp = 0.0;
  std::size_t true_positives = 0, false_positives = 0;
};

/// Points ordered by increasing threshold, so TPR and FPP do not increase
/// along the list.
struct FrocCurve {
  std::vector<FrocPoint> points;
  std::size_t lesions = 0, patients = 0;
  /// Highest TPR among points with FPP <= fpp (0 if none).
  double tpr_at(double fpp) const;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0, tpr = 0.0;
};

/// Points ordered by decreasing threshold from (0, 0) to (1, 1); equal
/// scores form a single step, so tied scores contribute a diagonal segment.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// labels: true = positive. Trapezoidal AUC; 1 when a class is missing
/// (no pair is misordered).
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels);

struct OperatingPoint {
  double threshold = 0.0;
  double tpr = 0.0, fpp = 0.0;
  std::size_t detected = 0, false_positives = 0;
  /// Per detected lesion, the best DSI among detections matching it.
  std::vector<double> segmentation_dsi;
  double mean_dsi = 0.0, std_dsi = 0.0;
};

struct DetectionReport {
  FrocCurve froc;
  RocCurve roc;          ///< per input detection: lesion match vs none
  OperatingPoint operating;
};

/// `scored[c]` holds case c's detections before fusion, each with a lesion
/// score. For every distinct score threshold the detections at or above it
/// are fused and matched: a lesion is found when a survivor has DSI >=
/// match_dsi with it, and a survivor matching no lesion is a false
/// positive. FPP divides by the number of distinct patients. The operating
/// point is evaluated the same way at `operating_threshold`. Throws
/// InvalidArgument when there are no lesions at all.
DetectionReport detection_metrics(const std::vector<std::vector<Detection>>& scored,
                                  const std::vector<CaseTruth>& truth, double operating_threshold,
                                  double match_dsi = 0.2);

struct MeanStd {
  double mean = 0.0, std = 0.0;
  std::size_t n = 0;
};
MeanStd mean_std(const std::vector<double>& v);

/// Per lesion the best DSI over all of its case's candidates (0 when none
/// overlaps); mean and population standard deviation over lesions.
MeanStd arcg(const std::vector<std::vector<Region>>& candidates, const std::vector<CaseTruth>& truth,
             std::vector<double>* per_lesion = nullptr);

struct MalignancyReport {
  FrocCurve froc;       ///< threshold on malignancy_score
  RocCurve roc;         ///< every detection: matches a malignant lesion vs not
  RocCurve lesion_roc;  ///< detections matching a lesion: malignant vs benign
  std::size_t malignant_lesions = 0;
};

/// `detections[c]` are case c's final detections. At threshold t a flagged
/// detection (score >= t) is a true hit for every malignant lesion it
/// matches; a flagged detection matching no malignant lesion is a false
/// positive, benign hits included.
MalignancyReport malignancy_metrics(const std::vector<std::vector<Detection>>& detections,
                                    const std::vector<CaseTruth>& truth, double match_dsi = 0.2);

}  // namespace siftcad
