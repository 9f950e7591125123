#include "siftcad/pipeline.hpp"

#include <fstream>

#include "json.hpp"
#include "siftcad/error.hpp"
#include "siftcad/features.hpp"
#include "siftcad/nrrd.hpp"

namespace siftcad {

using nlohmann::json;

std::vector<Detection> to_detections(const std::vector<RegionCandidate>& cands, Dims original_dims,
                                     Spacing /*original_spacing*/) {
  std::vector<Detection> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    Detection d;
    d.mask = original_region(c, original_dims);
    d.lesion_score = std::max(0.0, c.lesion_score);
    d.malignancy_score = std::max(0.0, c.malignancy_score);
    d.scale = c.scale;
    d.threshold_index = c.threshold_index;
    d.candidate_id = c.id;
    d.volume_mm3 = c.physical_volume;
    out.push_back(std::move(d));
  }
  return out;
}

CaseTruth case_truth(const BreastCase& c) {
  CaseTruth t;
  t.patient_id = c.patient_id.empty() ? c.id : c.patient_id;
  for (const auto& g : c.ground_truth) t.lesions.push_back(Region::from_mask(g));
  t.malignant = c.malignant;
  return t;
}

CaseTruth load_case_truth(const Manifest& m, const CaseEntry& e) {
  CaseTruth t;
  t.patient_id = e.patient_id.empty() ? e.id : e.patient_id;
  for (const auto& l : e.lesions) {
    t.lesions.push_back(Region::from_mask(load_mask(m.resolve(l.mask))));
    t.malignant.push_back(l.malignant);
  }
  return t;
}

CaseSamples training_samples(const BreastCase& c, const CandidateParams& p) {
  CaseSamples s;
  s.case_id = c.id;
  auto cands = generate_candidates(c, p);
  s.candidates = cands.size();
  assign_training_labels(cands, c.ground_truth);

  // Best lesion per candidate, for the malignancy set.
  std::vector<Region> lesions;
  for (const auto& g : c.ground_truth) lesions.push_back(Region::from_mask(g));
  std::vector<int> lesion_of(cands.size(), -1);
  std::vector<RegionCandidate> keep;
  std::vector<std::size_t> keep_index;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Region r = original_region(cands[i], c.dims());
    double best = 0.6;
    for (std::size_t l = 0; l < lesions.size(); ++l) {
      const double d = dsi(r, lesions[l]);
      if (d >= best) {
        best = d;
        lesion_of[i] = static_cast<int>(l);
      }
    }
    switch (cands[i].label) {
      case CandidateLabel::Positive: ++s.positives; break;
      case CandidateLabel::Negative: ++s.negatives; break;
      default: ++s.neutral; break;
    }
    if (cands[i].label == CandidateLabel::Positive || cands[i].label == CandidateLabel::Negative ||
        lesion_of[i] >= 0) {
      keep.push_back(cands[i]);
      keep_index.push_back(i);
    }
  }
  const FeatureContext ctx(c, p.M);
  const auto features = extract_features(keep, ctx);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep_index[k];
    if (cands[i].label == CandidateLabel::Positive || cands[i].label == CandidateLabel::Negative)
      s.lesion.push_back({features[k], cands[i].label == CandidateLabel::Positive ? 1 : -1, c.id});
    if (lesion_of[i] >= 0)
      s.malignancy.push_back({features[k], c.malignant[static_cast<std::size_t>(lesion_of[i])] ? 1 : -1, c.id});
  }
  return s;
}

PipelineModels train_models(const std::vector<CaseSamples>& cases, const TrainParams& p) {
  std::vector<LabeledSample> lesion, malignancy;
  for (const auto& c : cases) {
    lesion.insert(lesion.end(), c.lesion.begin(), c.lesion.end());
    malignancy.insert(malignancy.end(), c.malignancy.begin(), c.malignancy.end());
  }
  PipelineModels m;
  m.lesion = train_rusboost(lesion, p.rusboost);
  m.malignancy = train_rf(malignancy, p.forest);
  return m;
}

CaseResult run_pipeline(const BreastCase& c, const PipelineModels& models, const PipelineParams& p) {
  CaseResult r;
  r.case_id = c.id;
  r.theta_lesion = p.theta_lesion;
  r.theta_malig = p.theta_malig;
  auto cands = generate_candidates(c, p.candidates);
  if (cands.empty()) return r;
  const FeatureContext ctx(c, p.candidates.M);
  const auto features = extract_features(cands, ctx);
  for (std::size_t i = 0; i < cands.size(); ++i) cands[i].lesion_score = models.lesion.predict(features[i]);
  r.scored = to_detections(cands, c.dims(), c.spacing());

  std::vector<Detection> kept;
  for (const auto& d : r.scored)
    if (d.lesion_score >= p.theta_lesion) kept.push_back(d);
  r.detections = fuse_labels(kept);
  for (auto& d : r.detections) {
    // Candidate ids are positions in `cands`.
    d.malignancy_score = models.malignancy.predict(features[d.candidate_id]);
    d.malignant = d.malignancy_score >= p.theta_malig;
  }
  return r;
}

namespace {

json detection_json(const Detection& d) {
  json runs = json::array();
  for (const auto& [start, len] : d.mask.run_lengths()) runs.push_back({start, len});
  return {{"candidate_id", d.candidate_id}, {"scale", d.scale},
          {"threshold_index", d.threshold_index}, {"volume_mm3", d.volume_mm3},
          {"lesion_score", d.lesion_score}, {"malignancy_score", d.malignancy_score},
          {"malignant", d.malignant}, {"voxel_count", d.mask.size()}, {"rle", std::move(runs)}};
}

Detection detection_from_json(const json& j, Dims dims) {
  Detection d;
  d.candidate_id = j.at("candidate_id").get<std::size_t>();
  d.scale = j.at("scale").get<int>();
  d.threshold_index = j.at("threshold_index").get<int>();
  d.volume_mm3 = j.at("volume_mm3").get<double>();
  d.lesion_score = j.at("lesion_score").get<double>();
  d.malignancy_score = j.at("malignancy_score").get<double>();
  d.malignant = j.at("malignant").get<bool>();
  std::vector<std::pair<Region::Index, Region::Index>> runs;
  for (const auto& r : j.at("rle")) runs.emplace_back(r.at(0).get<Region::Index>(), r.at(1).get<Region::Index>());
  d.mask = Region::from_run_lengths(dims, runs);
  return d;
}

}  // namespace

void save_case_result(const CaseResult& r, Dims dims, Spacing spacing, const std::filesystem::path& path) {
  json scored = json::array(), dets = json::array();
  for (const auto& d : r.scored) scored.push_back(detection_json(d));
  for (const auto& d : r.detections) dets.push_back(detection_json(d));
  const json j{{"version", 1},
               {"case", r.case_id},
               {"theta_lesion", r.theta_lesion},
               {"theta_malig", r.theta_malig},
               {"dims", {dims.nx, dims.ny, dims.nz}},
               {"spacing", {spacing.x, spacing.y, spacing.z}},
               {"detections", std::move(dets)},
               {"scored", std::move(scored)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

CaseResult load_case_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CaseResult r;
  try {
    const json j = json::parse(in);
    if (j.value("version", 0) != 1) throw FormatError(path.string() + ": unsupported detection file version");
    r.case_id = j.at("case").get<std::string>();
    r.theta_lesion = j.at("theta_lesion").get<double>();
    r.theta_malig = j.at("theta_malig").get<double>();
    const auto d = j.at("dims").get<std::array<std::size_t, 3>>();
    const Dims dims{d[0], d[1], d[2]};
    for (const auto& x : j.at("detections")) r.detections.push_back(detection_from_json(x, dims));
    for (const auto& x : j.at("scored")) r.scored.push_back(detection_from_json(x, dims));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return r;
}

Volume3D detection_label_map(const std::vector<Detection>& detections, Dims dims, Spacing spacing) {
  Volume3D v(dims, spacing, 0.0);
  for (std::size_t i = 0; i < detections.size(); ++i)
    for (auto idx : detections[i].mask.voxels()) v[idx] = static_cast<double>(i + 1);
  return v;
}

}  // namespace siftcad
