// siftcad: batch front end for phantom generation, candidate sifting,
// training, detection and evaluation.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "siftcad/candidates.hpp"
#include "siftcad/classifiers.hpp"
#include "siftcad/error.hpp"
#include "siftcad/features.hpp"
#include "siftcad/manifest.hpp"
#include "siftcad/metrics.hpp"
#include "siftcad/nrrd.hpp"
#include "siftcad/parallel.hpp"
#include "siftcad/phantom.hpp"
#include "siftcad/pipeline.hpp"

namespace fs = std::filesystem;
using namespace siftcad;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  CandidateParams candidates;
  double theta_lesion = 0.5;
  double theta_malig = 0.5;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t n_trees = 2000;
  double learning_rate = 0.1;
  SuiteSpec phantom;
};

void log(const std::string& msg) { std::cerr << "[siftcad] " << msg << '\n'; }

template <class T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config field '") + key + "': " + e.what());
  }
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError("config: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw UsageError("config: unknown key '" + k + "' in " + where);
  }
}

void load_config(const fs::path& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  check_keys(j, {"params", "threads", "rusboost", "phantom"}, "top level");
  if (j.contains("params")) {
    const auto& p = j["params"];
    check_keys(p, {"M", "N", "T", "v_min", "v_max", "theta_lesion", "theta_malig", "seed"}, "params");
    take(p, "M", c.candidates.M);
    take(p, "N", c.candidates.N);
    take(p, "T", c.candidates.T);
    take(p, "v_min", c.candidates.v_min);
    take(p, "v_max", c.candidates.v_max);
    take(p, "theta_lesion", c.theta_lesion);
    take(p, "theta_malig", c.theta_malig);
    take(p, "seed", c.seed);
  }
  take(j, "threads", c.threads);
  if (j.contains("rusboost")) {
    check_keys(j["rusboost"], {"n_trees", "learning_rate"}, "rusboost");
    take(j["rusboost"], "n_trees", c.n_trees);
    take(j["rusboost"], "learning_rate", c.learning_rate);
  }
  if (j.contains("phantom")) {
    const auto& p = j["phantom"];
    check_keys(p, {"cases", "d_min", "d_max", "train_fraction", "noise_sigma"}, "phantom");
    take(p, "cases", c.phantom.n_cases);
    take(p, "d_min", c.phantom.d_min);
    take(p, "d_max", c.phantom.d_max);
    take(p, "train_fraction", c.phantom.train_fraction);
    take(p, "noise_sigma", c.phantom.noise_sigma);
  }
}

void validate(const RunConfig& c) {
  if (c.candidates.M < 1 || c.candidates.N < 1 || c.candidates.T < 1) throw UsageError("M, N and T must be >= 1");
  if (!(c.candidates.v_min > 0) || !(c.candidates.v_max > c.candidates.v_min))
    throw UsageError("need 0 < v_min < v_max");
  if (c.threads < 1) throw UsageError("threads must be >= 1");
  if (c.n_trees < 1) throw UsageError("n_trees must be >= 1");
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream s;
  s << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// The timestamp is the only line that differs between identical runs.
void write_report(ojson body, const fs::path& path) {
  ojson j;
  j["generated"] = timestamp();
  for (auto& [k, v] : body.items()) j[k] = v;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ojson config_json(const RunConfig& c) {
  return {{"M", c.candidates.M},
          {"N", c.candidates.N},
          {"T", c.candidates.T},
          {"v_min", c.candidates.v_min},
          {"v_max", c.candidates.v_max},
          {"theta_lesion", c.theta_lesion},
          {"theta_malig", c.theta_malig},
          {"seed", c.seed}};
}

std::vector<const CaseEntry*> select(const Manifest& m, const std::string& split, const std::string& only) {
  std::vector<const CaseEntry*> out;
  for (const auto& c : m.cases) {
    if (!only.empty() && c.id != only) continue;
    if (only.empty() && split != "all" && c.split != split) continue;
    out.push_back(&c);
  }
  if (out.empty())
    throw InvalidArgument("no case selected (split '" + split + "'" + (only.empty() ? "" : ", case '" + only + "'") +
                          ")");
  return out;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

void write_froc_csv(const FrocCurve& f, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << "threshold,tpr,fpp,true_positives,false_positives\n";
  for (const auto& p : f.points)
    out << p.threshold << ',' << p.tpr << ',' << p.fpp << ',' << p.true_positives << ',' << p.false_positives << '\n';
}

void write_roc_csv(const RocCurve& r, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << "threshold,fpr,tpr\n";
  for (const auto& p : r.points) out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
}

ojson tpr_table(const FrocCurve& f) {
  ojson t = ojson::array();
  for (double fpp : {0.5, 1.0, 2.0, 3.0, 4.0, 8.0}) t.push_back({{"fpp", fpp}, {"tpr", f.tpr_at(fpp)}});
  return t;
}

// --- commands ---------------------------------------------------------------

void cmd_phantom(const RunConfig& c, const fs::path& out) {
  SuiteSpec s = c.phantom;
  s.seed = c.seed;
  const Manifest m = write_suite(s, out);
  std::size_t lesions = 0;
  for (const auto& e : m.cases) lesions += e.lesions.size();
  log("wrote " + std::to_string(m.cases.size()) + " cases, " + std::to_string(lesions) + " lesions to " + out.string());
}

void cmd_sift(const RunConfig& c, const fs::path& manifest, const std::string& case_id, const fs::path& out,
              const std::string& generator, bool features) {
  const Manifest m = load_manifest(manifest);
  ensure_dir(out);
  for (const CaseEntry* e : select(m, "all", case_id)) {
    const BreastCase bc = load_case(m, *e);
    std::vector<RegionCandidate> cands;
    if (generator == "sifting") {
      std::vector<ScaleTrace> trace;
      cands = generate_candidates(bc, c.candidates, &trace);
      for (const auto& t : trace) {
        save_volume(t.response, out / (e->id + "_ms3d_s" + std::to_string(t.scale) + ".nrrd"), NrrdType::Float32);
        log(e->id + " scale " + std::to_string(t.scale) + ": " + std::to_string(t.components) + " components, " +
            std::to_string(t.kept) + " kept");
      }
    } else {
      cands = make_generator(generator, c.candidates)->generate(bc);
    }
    assign_training_labels(cands, bc.ground_truth);
    save_candidates(cands, e->id, out / (e->id + "_candidates.json"));
    if (features) {
      const FeatureContext ctx(bc, c.candidates.M);
      const auto f = extract_features(cands, ctx);
      std::vector<FeatureRow> rows;
      for (std::size_t i = 0; i < cands.size(); ++i) rows.push_back({e->id, cands[i].id, cands[i].label, f[i]});
      write_feature_csv(rows, out / (e->id + "_features.csv"));
    }
    log(e->id + ": " + std::to_string(cands.size()) + " candidates");
  }
}

void cmd_train(const RunConfig& c, const fs::path& manifest, const fs::path& out, const std::string& split,
               std::size_t cv_folds) {
  const Manifest m = load_manifest(manifest);
  const auto entries = select(m, split, "");
  ensure_dir(out);
  std::vector<CaseSamples> samples;
  ojson cases = ojson::array();
  for (const CaseEntry* e : entries) {
    const BreastCase bc = load_case(m, *e);
    CaseSamples s = training_samples(bc, c.candidates);
    log(e->id + ": " + std::to_string(s.candidates) + " candidates, " + std::to_string(s.positives) + " positive, " +
        std::to_string(s.negatives) + " negative, " + std::to_string(s.neutral) + " neutral");
    cases.push_back({{"case", e->id},
                     {"candidates", s.candidates},
                     {"positive", s.positives},
                     {"negative", s.negatives},
                     {"neutral", s.neutral},
                     {"malignancy_samples", s.malignancy.size()}});
    samples.push_back(std::move(s));
  }
  TrainParams tp;
  tp.rusboost.n_trees = c.n_trees;
  tp.rusboost.learning_rate = c.learning_rate;
  tp.rusboost.seed = c.seed;
  tp.forest.seed = c.seed;
  const PipelineModels models = train_models(samples, tp);
  save_model(models.lesion, out / "lesion_model.json");
  save_model(models.malignancy, out / "malignancy_model.json");
  log("lesion model: " + std::to_string(models.lesion.trees.size()) + " trees" +
      (models.lesion.stopped_early ? " (stopped early)" : ""));
  log("malignancy model: " + std::to_string(models.malignancy.n_tree()) + " trees, m_try " +
      std::to_string(models.malignancy.m_try));

  ojson grid = ojson::array();
  for (const auto& g : models.malignancy.grid)
    grid.push_back({{"n_tree", g.n_tree}, {"m_try", g.m_try}, {"oob_mse", g.oob_mse}, {"oob_accuracy", g.oob_accuracy}});
  ojson report{{"config", config_json(c)},
               {"cases", std::move(cases)},
               {"lesion_model",
                {{"trees", models.lesion.trees.size()},
                 {"rounds_requested", models.lesion.rounds_requested},
                 {"stopped_early", models.lesion.stopped_early},
                 {"learning_rate", models.lesion.learning_rate}}},
               {"malignancy_model",
                {{"n_tree", models.malignancy.n_tree()},
                 {"m_try", models.malignancy.m_try},
                 {"oob_mse", models.malignancy.oob_mse},
                 {"grid", std::move(grid)}}}};
  if (cv_folds > 0) {
    std::vector<LabeledSample> all;
    for (const auto& s : samples) all.insert(all.end(), s.lesion.begin(), s.lesion.end());
    const double loss = cross_validate(all, cv_folds, [&](const std::vector<LabeledSample>& train) {
      return std::unique_ptr<Classifier>(new RusBoostModel(train_rusboost(train, tp.rusboost)));
    });
    report["lesion_model"]["cv_folds"] = cv_folds;
    report["lesion_model"]["cv_mse"] = loss;
    log("lesion model " + std::to_string(cv_folds) + "-fold CV MSE " + std::to_string(loss));
  }
  write_report(std::move(report), out / "training_report.json");
}

void cmd_detect(const RunConfig& c, const fs::path& manifest, const fs::path& models_dir, const fs::path& out,
                const std::string& split) {
  const Manifest m = load_manifest(manifest);
  const auto entries = select(m, split, "");
  PipelineModels models;
  models.lesion = load_rusboost(models_dir / "lesion_model.json");
  models.malignancy = load_random_forest(models_dir / "malignancy_model.json");
  ensure_dir(out);
  PipelineParams p;
  p.candidates = c.candidates;
  p.theta_lesion = c.theta_lesion;
  p.theta_malig = c.theta_malig;
  for (const CaseEntry* e : entries) {
    const BreastCase bc = load_case(m, *e);
    const CaseResult r = run_pipeline(bc, models, p);
    save_case_result(r, bc.dims(), bc.spacing(), out / (e->id + "_detections.json"));
    save_volume(detection_label_map(r.detections, bc.dims(), bc.spacing()), out / (e->id + "_detections.nrrd"),
                NrrdType::UInt16);
    std::size_t flagged = 0;
    for (const auto& d : r.detections) flagged += d.malignant;
    log(e->id + ": " + std::to_string(r.scored.size()) + " candidates, " + std::to_string(r.detections.size()) +
        " detections, " + std::to_string(flagged) + " flagged malignant");
  }
}

void cmd_evaluate(const fs::path& manifest, const fs::path& detections, const fs::path& out, const std::string& split,
                  double match_dsi) {
  const Manifest m = load_manifest(manifest);
  const auto entries = select(m, split, "");
  std::vector<std::vector<Detection>> scored, final_dets;
  std::vector<std::vector<Region>> regions;
  std::vector<CaseTruth> truth;
  std::optional<double> theta_lesion, theta_malig;
  for (const CaseEntry* e : entries) {
    const CaseResult r = load_case_result(detections / (e->id + "_detections.json"));
    if (theta_lesion && (*theta_lesion != r.theta_lesion || *theta_malig != r.theta_malig))
      throw InvalidArgument("detection files were produced with different thresholds");
    theta_lesion = r.theta_lesion;
    theta_malig = r.theta_malig;
    truth.push_back(load_case_truth(m, *e));
    std::vector<Region> rs;
    for (const auto& d : r.scored) rs.push_back(d.mask);
    regions.push_back(std::move(rs));
    scored.push_back(r.scored);
    final_dets.push_back(r.detections);
  }
  ensure_dir(out);
  const DetectionReport det = detection_metrics(scored, truth, *theta_lesion, match_dsi);
  const MalignancyReport mal = malignancy_metrics(final_dets, truth, match_dsi);
  const MeanStd acc = arcg(regions, truth);
  write_froc_csv(det.froc, out / "froc.csv");
  write_roc_csv(det.roc, out / "roc.csv");
  write_froc_csv(mal.froc, out / "malignancy_froc.csv");
  write_roc_csv(mal.roc, out / "malignancy_roc.csv");
  write_roc_csv(mal.lesion_roc, out / "malignancy_lesion_roc.csv");

  const auto& op = det.operating;
  ojson report{
      {"cases", entries.size()},
      {"patients", det.froc.patients},
      {"lesions", det.froc.lesions},
      {"match_dsi", match_dsi},
      {"arcg", {{"mean", acc.mean}, {"std", acc.std}}},
      {"detection",
       {{"theta_lesion", *theta_lesion},
        {"tpr", op.tpr},
        {"fpp", op.fpp},
        {"detected", op.detected},
        {"false_positives", op.false_positives},
        {"segmentation_dsi", {{"mean", op.mean_dsi}, {"std", op.std_dsi}}},
        {"candidate_roc_auc", det.roc.auc},
        {"froc", tpr_table(det.froc)}}},
      {"malignancy",
       {{"theta_malig", *theta_malig},
        {"malignant_lesions", mal.malignant_lesions},
        {"roc_auc", mal.roc.auc},
        {"lesion_roc_auc", mal.lesion_roc.auc},
        {"froc", tpr_table(mal.froc)}}}};
  write_report(std::move(report), out / "metrics.json");
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << "TPR " << op.tpr << " at FPP " << op.fpp << ", DSI " << op.mean_dsi
    << " +- " << op.std_dsi << ", ARCG " << acc.mean << " +- " << acc.std << ", malignancy AUC "
    << mal.lesion_roc.auc;
  log(s.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breast MRI lesion detection by 3D multiscale morphological sifting"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "siftcad 0.1.0");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<int> M, N, T;
  std::optional<double> v_min, v_max, theta_lesion, theta_malig;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every stochastic stage");
  app.add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
  app.add_option("--scales", M, "Number of scales M");
  app.add_option("--orientations", N, "Orientations per sifting pass N");
  app.add_option("--thresholds", T, "Multilevel Otsu thresholds per scale T");
  app.add_option("--v-min", v_min, "Smallest lesion volume (mm^3)");
  app.add_option("--v-max", v_max, "Largest lesion volume (mm^3)");
  app.add_option("--theta-lesion", theta_lesion, "Lesion score threshold");
  app.add_option("--theta-malig", theta_malig, "Malignancy score threshold");

  std::string out, manifest, case_id, models, dets, split = "train", test_split = "test", generator = "sifting";
  std::optional<std::size_t> cases;
  std::optional<double> d_min, d_max, train_fraction, noise;
  std::optional<std::size_t> n_trees;
  std::size_t cv_folds = 0;
  bool features = false;
  double match_dsi = 0.2;

  auto* phantom = app.add_subcommand("phantom", "Write a synthetic case suite and its manifest");
  phantom->add_option("--out", out, "Output directory")->required();
  phantom->add_option("--cases", cases, "Number of cases");
  phantom->add_option("--d-min", d_min, "Smallest lesion diameter (mm)");
  phantom->add_option("--d-max", d_max, "Largest lesion diameter (mm)");
  phantom->add_option("--train-fraction", train_fraction, "Fraction of cases in the train split");
  phantom->add_option("--noise", noise, "Gaussian noise sigma");

  auto* sift = app.add_subcommand("sift", "Generate region candidates and ms3d debug volumes");
  sift->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  sift->add_option("--case", case_id, "Case id (default: every case)");
  sift->add_option("--out", out, "Output directory")->required();
  sift->add_option("--generator", generator, "sifting or kmeans")->check(CLI::IsMember({"sifting", "kmeans"}));
  sift->add_flag("--features", features, "Also write the feature CSV");

  auto* train = app.add_subcommand("train", "Train the lesion and malignancy classifiers");
  train->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Model directory")->required();
  train->add_option("--split", split, "Manifest split to train on (or 'all')");
  train->add_option("--trees", n_trees, "Boosting rounds");
  train->add_option("--cv", cv_folds, "Also report k-fold CV loss of the lesion model");

  auto* detect = app.add_subcommand("detect", "Run the detection pipeline");
  detect->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  detect->add_option("--models", models, "Model directory")->required()->check(CLI::ExistingDirectory);
  detect->add_option("--out", out, "Output directory")->required();
  detect->add_option("--split", test_split, "Manifest split (or 'all')");

  auto* evaluate = app.add_subcommand("evaluate", "Score detections against the ground truth");
  evaluate->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--detections", dets, "Detection directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", out, "Report directory")->required();
  evaluate->add_option("--split", test_split, "Manifest split (or 'all')");
  evaluate->add_option("--match-dsi", match_dsi, "DSI for a detection to match a lesion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig c;
  try {
    if (!config_path.empty()) load_config(config_path, c);
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    if (M) c.candidates.M = *M;
    if (N) c.candidates.N = *N;
    if (T) c.candidates.T = *T;
    if (v_min) c.candidates.v_min = *v_min;
    if (v_max) c.candidates.v_max = *v_max;
    if (theta_lesion) c.theta_lesion = *theta_lesion;
    if (theta_malig) c.theta_malig = *theta_malig;
    if (cases) c.phantom.n_cases = *cases;
    if (d_min) c.phantom.d_min = *d_min;
    if (d_max) c.phantom.d_max = *d_max;
    if (train_fraction) c.phantom.train_fraction = *train_fraction;
    if (noise) c.phantom.noise_sigma = *noise;
    if (n_trees) c.n_trees = *n_trees;
    validate(c);
  } catch (const UsageError& e) {
    std::cerr << "siftcad: " << e.what() << '\n';
    return kUsage;
  }
  set_thread_count(c.threads);

  try {
    if (phantom->parsed()) cmd_phantom(c, out);
    if (sift->parsed()) cmd_sift(c, manifest, case_id, out, generator, features);
    if (train->parsed()) cmd_train(c, manifest, out, split, cv_folds);
    if (detect->parsed()) cmd_detect(c, manifest, models, out, test_split);
    if (evaluate->parsed()) cmd_evaluate(manifest, dets, out, test_split, match_dsi);
  } catch (const std::exception& e) {
    std::cerr << "siftcad: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
