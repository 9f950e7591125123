#include "siftcad/manifest.hpp"

#include <fstream>

#include "json.hpp"

#include "siftcad/nrrd.hpp"

namespace siftcad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kManifestVersion = 1;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get(const json& j, const char* key, const std::string& who) {
  if (!j.contains(key)) throw FormatError("manifest: " + who + " lacks field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError("manifest: " + who + " field '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<const CaseEntry*> Manifest::split(const std::string& name) const {
  std::vector<const CaseEntry*> out;
  for (const auto& c : cases) {
    if (c.split == name) out.push_back(&c);
  }
  return out;
}

fs::path Manifest::resolve(const std::string& p) const { return siftcad::resolve(base_dir, p); }

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  m.base_dir = path.parent_path();
  if (!j.contains("cases") || !j["cases"].is_array()) throw FormatError("manifest: missing 'cases' array");
  for (const auto& c : j["cases"]) {
    CaseEntry e;
    e.id = get<std::string>(c, "id", "case");
    const std::string who = "case " + e.id;
    e.patient_id = c.value("patient", e.id);
    e.side = c.value("side", std::string("left"));
    e.split = c.value("split", std::string("train"));
    e.t1 = get<std::string>(c, "t1", who);
    e.t2 = get<std::string>(c, "t2", who);
    e.dce = get<std::vector<std::string>>(c, "dce", who);
    e.acquisition_times = get<std::vector<double>>(c, "acquisition_times", who);
    e.breast_mask = c.value("breast_mask", std::string());
    e.fat_mask = c.value("fat_mask", std::string());
    if (c.contains("lesions")) {
      for (const auto& l : c["lesions"]) {
        LesionEntry le;
        le.mask = get<std::string>(l, "mask", who + " lesion");
        le.malignant = l.value("malignant", false);
        le.diameter_mm = l.value("diameter_mm", 0.0);
        le.shape = l.value("shape", std::string());
        e.lesions.push_back(std::move(le));
      }
    }
    m.cases.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const Manifest& m, const fs::path& path) {
  json cases = json::array();
  for (const auto& e : m.cases) {
    json c;
    c["id"] = e.id;
    c["patient"] = e.patient_id;
    c["side"] = e.side;
    c["split"] = e.split;
    c["t1"] = e.t1;
    c["t2"] = e.t2;
    c["dce"] = e.dce;
    c["acquisition_times"] = e.acquisition_times;
    if (!e.breast_mask.empty()) c["breast_mask"] = e.breast_mask;
    if (!e.fat_mask.empty()) c["fat_mask"] = e.fat_mask;
    json lesions = json::array();
    for (const auto& l : e.lesions) {
      json jl{{"mask", l.mask}, {"malignant", l.malignant}};
      if (l.diameter_mm > 0.0) jl["diameter_mm"] = l.diameter_mm;
      if (!l.shape.empty()) jl["shape"] = l.shape;
      lesions.push_back(std::move(jl));
    }
    c["lesions"] = std::move(lesions);
    cases.push_back(std::move(c));
  }
  json j{{"version", kManifestVersion}, {"cases", std::move(cases)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

BreastCase load_case(const Manifest& m, const CaseEntry& e) {
  BreastCase c;
  c.id = e.id;
  c.patient_id = e.patient_id.empty() ? e.id : e.patient_id;
  c.side = parse_side(e.side);
  c.t1 = load_volume(resolve(m.base_dir, e.t1));
  c.t2 = load_volume(resolve(m.base_dir, e.t2));
  for (const auto& p : e.dce) c.dce.push_back(load_volume(resolve(m.base_dir, p)));
  c.acquisition_times = e.acquisition_times;
  c.breast_mask = e.breast_mask.empty() ? breast_mask(c.t1) : load_mask(resolve(m.base_dir, e.breast_mask));
  c.fat_mask = e.fat_mask.empty() ? fat_mask(c.t1, c.breast_mask) : load_mask(resolve(m.base_dir, e.fat_mask));
  for (const auto& l : e.lesions) {
    c.ground_truth.push_back(load_mask(resolve(m.base_dir, l.mask)));
    c.malignant.push_back(l.malignant);
  }
  c.validate();
  return c;
}

CaseEntry save_case(const BreastCase& c, const fs::path& base_dir, const std::string& subdir,
                    const std::string& split) {
  const fs::path dir = base_dir / subdir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  CaseEntry e;
  e.id = c.id;
  e.patient_id = c.patient_id;
  e.side = side_name(c.side);
  e.split = split;
  auto rel = [&](const std::string& name) { return (fs::path(subdir) / name).generic_string(); };
  save_volume(c.t1, dir / "t1.nrrd");
  e.t1 = rel("t1.nrrd");
  save_volume(c.t2, dir / "t2.nrrd");
  e.t2 = rel("t2.nrrd");
  for (std::size_t i = 0; i < c.dce.size(); ++i) {
    const std::string name = "dce" + std::to_string(i) + ".nrrd";
    save_volume(c.dce[i], dir / name);
    e.dce.push_back(rel(name));
  }
  e.acquisition_times = c.acquisition_times;
  save_mask(c.breast_mask, dir / "breast_mask.nrrd");
  e.breast_mask = rel("breast_mask.nrrd");
  save_mask(c.fat_mask, dir / "fat_mask.nrrd");
  e.fat_mask = rel("fat_mask.nrrd");
  for (std::size_t i = 0; i < c.ground_truth.size(); ++i) {
    const std::string name = "lesion" + std::to_string(i) + ".nrrd";
    save_mask(c.ground_truth[i], dir / name);
    LesionEntry le;
    le.mask = rel(name);
    le.malignant = c.malignant[i];
    e.lesions.push_back(std::move(le));
  }
  return e;
}

}  // namespace siftcad
