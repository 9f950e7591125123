#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "siftcad/breast_case.hpp"
#include "siftcad/candidates.hpp"
#include "siftcad/classifiers.hpp"
#include "siftcad/manifest.hpp"
#include "siftcad/metrics.hpp"

namespace siftcad {

struct PipelineModels {
  RusBoostModel lesion;
  RandomForestModel malignancy;
};

struct PipelineParams {
  CandidateParams candidates;
  double theta_lesion = 0.5;
  double theta_malig = 0.5;
};

/// Candidates upscaled to the original grid, ids and scores carried over.
std::vector<Detection> to_detections(const std::vector<RegionCandidate>& cands, Dims original_dims,
                                     Spacing original_spacing);

CaseTruth case_truth(const BreastCase& c);
/// Reads only the lesion masks of a manifest entry.
CaseTruth load_case_truth(const Manifest& m, const CaseEntry& e);

struct CaseSamples {
  std::string case_id;
  std::vector<LabeledSample> lesion;      ///< positives (+1) and negatives (-1)
  std::vector<LabeledSample> malignancy;  ///< candidates with DSI >= 0.6 to a lesion, +1 if it is malignant
  std::size_t candidates = 0, positives = 0, negatives = 0, neutral = 0;
};

/// Candidate generation, training labels and features for one case.
CaseSamples training_samples(const BreastCase& c, const CandidateParams& p);

struct TrainParams {
  RusBoostParams rusboost;
  RandomForestParams forest;
};

PipelineModels train_models(const std::vector<CaseSamples>& cases, const TrainParams& p);

struct CaseResult {
  std::string case_id;
  double theta_lesion = 0.5, theta_malig = 0.5;
  /// Every candidate with its lesion score, before thresholding and fusion.
  std::vector<Detection> scored;
  /// Survivors of the lesion threshold and fusion, with malignancy scores.
  std::vector<Detection> detections;
};

/// Candidates, features, lesion scores, lesion threshold, fusion, then the
/// malignancy forest on the survivors and the malignancy threshold.
CaseResult run_pipeline(const BreastCase& c, const PipelineModels& models, const PipelineParams& p);

/// JSON with both detection lists (run-length-encoded masks) and the grid.
void save_case_result(const CaseResult& r, Dims dims, Spacing spacing, const std::filesystem::path& path);
CaseResult load_case_result(const std::filesystem::path& path);
/// Label volume: detection i painted with value i + 1.
Volume3D detection_label_map(const std::vector<Detection>& detections, Dims dims, Spacing spacing);

}  // namespace siftcad
