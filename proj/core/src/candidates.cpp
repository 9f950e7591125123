#include "siftcad/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <unordered_map>

#include "json.hpp"

namespace siftcad {
namespace {

using nlohmann::json;

struct VoxelHash {
  std::size_t operator()(const std::vector<Region::Index>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h ^= std::hash<Region::Index>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

std::array<double, 3> centroid_mm(const Region& r, int m, Spacing original) {
  const Dims& d = r.dims();
  std::array<double, 3> c{0, 0, 0};
  for (auto v : r.voxels()) {
    c[0] += static_cast<double>(v % d.nx);
    c[1] += static_cast<double>((v / d.nx) % d.ny);
    c[2] += static_cast<double>(v / (d.nx * d.ny));
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, r.size()));
  for (std::size_t a = 0; a < 3; ++a) c[a] = coarse_to_fine(c[a] / n, m) * original[a];
  return c;
}

RegionCandidate make_candidate(Region region, int m, int t, Spacing original) {
  RegionCandidate rc;
  rc.scale = m;
  rc.threshold_index = t;
  const double f = std::ldexp(1.0, m - 1);
  rc.spacing = {original.x * f, original.y * f, original.z * f};
  rc.physical_volume = static_cast<double>(region.size()) * original.voxel_volume() * f * f * f;
  rc.centroid_mm = centroid_mm(region, m, original);
  rc.region = std::move(region);
  return rc;
}

}  // namespace

const char* label_name(CandidateLabel l) {
  switch (l) {
    case CandidateLabel::Positive:
      return "positive";
    case CandidateLabel::Negative:
      return "negative";
    case CandidateLabel::Neutral:
      return "neutral";
    case CandidateLabel::Unlabeled:
      break;
  }
  return "unlabeled";
}

double coarse_to_fine(double o, int m) {
  const double lag = 1.0 - (3.0 - std::numbers::sqrt3) / 2.0;
  double x = o;
  for (int k = 1; k < m; ++k) x = 2.0 * x + lag;
  return x;
}

bool size_sieve(double volume, int m, int M, double v_min, double v_max) {
  if (m < 1 || m > M) throw InvalidArgument("size_sieve: scale out of range");
  if (m == 1) return volume >= v_min && volume <= v_max / std::ldexp(1.0, 3 * (M - 1));
  return volume >= v_max / std::ldexp(1.0, 3 * (M - m + 1)) && volume <= v_max;
}

std::vector<RegionCandidate> generate_candidates(const BreastCase& c, const CandidateParams& p,
                                                 std::vector<ScaleTrace>* trace) {
  c.validate();
  if (p.M < 1 || p.N < 1 || p.T < 1) throw InvalidArgument("generate_candidates: M, N, T must be >= 1");
  const Spacing sp = c.spacing();
  if (sp.x != sp.y) throw InvalidArgument("generate_candidates: in-plane spacing must be isotropic");
  const MagnitudePlan plan = lse_magnitudes(p.v_min, p.v_max, sp.x, sp.z, p.M);
  const Volume3D sub = subtract(c.dce[1], c.dce[0]);

  std::vector<RegionCandidate> out;
  for (int m = 1; m <= p.M; ++m) {
    ScaleTrace st;
    st.scale = m;
    const ScaledImage scaled = scale_image(sub, m);
    st.breast = m == 1 ? c.breast_mask : downscale_mask(c.breast_mask, m);
    if (count(st.breast) == 0) continue;
    st.response = ms3d(scaled.volume, plan, p.N);
    st.normalized = normalize16(st.response, st.breast);

    // A flat response inside the breast carries no candidates.
    bool flat = true;
    for (std::size_t i = 0; i < st.normalized.size() && flat; ++i) flat = !(st.breast[i] && st.normalized[i] > 0.0);
    std::size_t levels = static_cast<std::size_t>(p.T);
    if (!flat) {
      // Fewer distinct responses than T+1 (noiseless inputs): use what is there.
      std::vector<double> distinct;
      for (std::size_t i = 0; i < st.normalized.size() && distinct.size() <= levels; ++i) {
        if (!st.breast[i]) continue;
        const double v = st.normalized[i];
        if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
      }
      levels = std::min(levels, distinct.size() - 1);
      flat = levels == 0;
    }
    if (!flat) {
      st.thresholds = multilevel_otsu(st.normalized, st.breast, levels);
      std::unordered_map<std::vector<Region::Index>, bool, VoxelHash> seen;
      for (int t = 1; t <= static_cast<int>(levels); ++t) {
        BinaryMask b = binarize(st.normalized, st.thresholds.values[static_cast<std::size_t>(t - 1)]);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = b[i] && st.breast[i];
        for (auto& comp : connected_components(b)) {
          ++st.components;
          const double vol = static_cast<double>(comp.size()) * sp.voxel_volume() * std::pow(8.0, m - 1);
          if (!size_sieve(vol, m, p.M, p.v_min, p.v_max)) continue;
          std::vector<Region::Index> key(comp.voxels().begin(), comp.voxels().end());
          if (!seen.emplace(std::move(key), true).second) continue;
          out.push_back(make_candidate(std::move(comp), m, t, sp));
          ++st.kept;
        }
      }
    }
    if (trace) trace->push_back(std::move(st));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
  return out;
}

std::vector<RegionCandidate> KMeansGenerator::generate(const BreastCase& c) const {
  c.validate();
  if (k_ < 2) throw InvalidArgument("kmeans generator: k must be >= 2");
  const Volume3D sub = subtract(c.dce[1], c.dce[0]);
  std::vector<double> vals;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (c.breast_mask[i]) vals.push_back(sub[i]);
  }
  if (vals.empty()) return {};
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  const auto K = static_cast<std::size_t>(k_);
  std::vector<double> centers(K);
  for (std::size_t j = 0; j < K; ++j) centers[j] = sorted[(2 * j + 1) * (sorted.size() - 1) / (2 * K)];
  // Lloyd iterations on sorted 1D data: clusters are contiguous ranges.
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> sum(K, 0.0);
    std::vector<std::size_t> n(K, 0);
    for (double v : sorted) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < K; ++j) {
        if (std::abs(v - centers[j]) < std::abs(v - centers[best])) best = j;
      }
      sum[best] += v;
      ++n[best];
    }
    bool moved = false;
    for (std::size_t j = 0; j < K; ++j) {
      if (n[j] == 0) continue;
      const double nc = sum[j] / static_cast<double>(n[j]);
      moved = moved || nc != centers[j];
      centers[j] = nc;
    }
    if (!moved) break;
  }
  std::sort(centers.begin(), centers.end());
  std::vector<RegionCandidate> out;
  for (std::size_t j = 1; j < K; ++j) {
    const double cut = 0.5 * (centers[j - 1] + centers[j]);
    BinaryMask b(sub.dims(), sub.spacing(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = c.breast_mask[i] && sub[i] >= cut;
    for (auto& comp : connected_components(b)) {
      const double vol = static_cast<double>(comp.size()) * sub.spacing().voxel_volume();
      if (vol < v_min_ || vol > v_max_) continue;
      out.push_back(make_candidate(std::move(comp), 1, static_cast<int>(j), sub.spacing()));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
  return out;
}

std::unique_ptr<CandidateGenerator> make_generator(const std::string& name, const CandidateParams& p) {
  if (name == "sifting") return std::make_unique<SiftingGenerator>(p);
  if (name == "kmeans") return std::make_unique<KMeansGenerator>(5, p.v_min, p.v_max);
  throw InvalidArgument("unknown candidate generator '" + name + "'");
}

Region original_region(const RegionCandidate& rc, Dims original_dims) {
  return upscale_region(rc.region, rc.scale, original_dims);
}

void save_candidates(const std::vector<RegionCandidate>& cands, const std::string& case_id,
                     const std::filesystem::path& path) {
  json list = json::array();
  for (const auto& rc : cands) {
    const auto& d = rc.region.dims();
    const auto& bb = rc.region.bbox();
    json runs = json::array();
    for (const auto& [start, len] : rc.region.run_lengths()) runs.push_back({start, len});
    json j{{"id", rc.id},
           {"scale", rc.scale},
           {"threshold_index", rc.threshold_index},
           {"volume_mm3", rc.physical_volume},
           {"centroid_mm", rc.centroid_mm},
           {"dims", {d.nx, d.ny, d.nz}},
           {"spacing", {rc.spacing.x, rc.spacing.y, rc.spacing.z}},
           {"bbox", {{"lo", bb.lo}, {"hi", bb.hi}}},
           {"voxel_count", rc.region.size()},
           {"rle", std::move(runs)},
           {"label", label_name(rc.label)}};
    if (rc.lesion_score >= 0.0) j["lesion_score"] = rc.lesion_score;
    if (rc.malignancy_score >= 0.0) j["malignancy_score"] = rc.malignancy_score;
    list.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json{{"version", 1}, {"case", case_id}, {"candidates", std::move(list)}}.dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RegionCandidate> load_candidates(const std::filesystem::path& path, std::string* case_id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RegionCandidate> out;
  try {
    json j;
    in >> j;
    if (case_id) *case_id = j.value("case", std::string());
    for (const auto& c : j.at("candidates")) {
      RegionCandidate rc;
      rc.id = c.at("id").get<std::size_t>();
      rc.scale = c.at("scale").get<int>();
      rc.threshold_index = c.at("threshold_index").get<int>();
      rc.physical_volume = c.at("volume_mm3").get<double>();
      rc.centroid_mm = c.at("centroid_mm").get<std::array<double, 3>>();
      const auto dv = c.at("dims").get<std::array<std::size_t, 3>>();
      const auto sv = c.at("spacing").get<std::array<double, 3>>();
      rc.spacing = {sv[0], sv[1], sv[2]};
      std::vector<std::pair<Region::Index, Region::Index>> runs;
      for (const auto& r : c.at("rle")) runs.emplace_back(r.at(0).get<Region::Index>(), r.at(1).get<Region::Index>());
      rc.region = Region::from_run_lengths({dv[0], dv[1], dv[2]}, runs);
      rc.lesion_score = c.value("lesion_score", -1.0);
      rc.malignancy_score = c.value("malignancy_score", -1.0);
      const std::string l = c.value("label", std::string("unlabeled"));
      rc.label = l == "positive"   ? CandidateLabel::Positive
                 : l == "negative" ? CandidateLabel::Negative
                 : l == "neutral"  ? CandidateLabel::Neutral
                                   : CandidateLabel::Unlabeled;
      out.push_back(std::move(rc));
    }
  } catch (const json::exception& e) {
    throw FormatError("candidates " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace siftcad
