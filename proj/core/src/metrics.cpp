#include "siftcad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "siftcad/error.hpp"

namespace siftcad {

double dsi(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.dims() == b.dims())) throw GeometryMismatch("dsi: dims mismatch");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += a[i] && b[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * double(both) / double(na + nb);
}

double dsi(const Region& a, const Region& b) {
  if (!(a.dims() == b.dims())) throw GeometryMismatch("dsi: dims mismatch");
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * double(intersection_size(a, b)) / double(a.size() + b.size());
}

namespace {

bool better(const Detection& a, const Detection& b) {
  if (a.lesion_score != b.lesion_score) return a.lesion_score > b.lesion_score;
  if (a.mask.size() != b.mask.size()) return a.mask.size() > b.mask.size();
  if (a.scale != b.scale) return a.scale < b.scale;
  return a.candidate_id < b.candidate_id;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

Edges overlap_edges(const std::vector<Detection>& d) {
  Edges e;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (overlaps(d[i].mask, d[j].mask)) e.emplace_back(i, j);
  return e;
}

// Indices of the fused survivors among the detections flagged `alive`.
std::vector<std::size_t> fuse(const std::vector<Detection>& d, const Edges& edges, const std::vector<bool>& alive) {
  UnionFind uf(d.size());
  for (const auto& [i, j] : edges)
    if (alive[i] && alive[j]) uf.unite(i, j);
  std::vector<std::size_t> winner(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!alive[i]) continue;
    std::size_t& w = winner[uf.find(i)];
    if (w == d.size() || better(d[i], d[w])) w = i;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (alive[i] && winner[uf.find(i)] == i) out.push_back(i);
  return out;
}

std::size_t patient_count(const std::vector<CaseTruth>& truth) {
  std::set<std::string> ids;
  std::size_t anonymous = 0;
  for (const auto& t : truth) {
    if (t.patient_id.empty())
      ++anonymous;
    else
      ids.insert(t.patient_id);
  }
  return ids.size() + anonymous;
}

std::vector<std::vector<double>> dsi_table(const std::vector<Detection>& d, const CaseTruth& t) {
  std::vector<std::vector<double>> out(d.size(), std::vector<double>(t.lesions.size(), 0.0));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t l = 0; l < t.lesions.size(); ++l) out[i][l] = dsi(d[i].mask, t.lesions[l]);
  return out;
}

// Distinct values ascending, followed by one threshold above all of them.
std::vector<double> sweep(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  const double top = v.empty() ? 1.0 : std::max(1.0, v.back());
  v.push_back(std::nextafter(top, std::numeric_limits<double>::infinity()));
  return v;
}

}  // namespace

std::vector<Detection> fuse_labels(const std::vector<Detection>& detections) {
  const auto keep = fuse(detections, overlap_edges(detections), std::vector<bool>(detections.size(), true));
  std::vector<Detection> out;
  for (std::size_t i : keep) out.push_back(detections[i]);
  return out;
}

double FrocCurve::tpr_at(double fpp) const {
  double best = 0.0;
  for (const auto& p : points)
    if (p.fpp <= fpp) best = std::max(best, p.tpr);
  return best;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_curve: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto P = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double N = static_cast<double>(labels.size()) - P;
  RocCurve r;
  const double top = scores.empty() ? 1.0 : std::max(1.0, scores[order[0]]);
  r.points.push_back({std::nextafter(top, std::numeric_limits<double>::infinity()), 0.0, 0.0});
  double tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] ? tp : fp) += 1;
    r.points.push_back({s, N > 0 ? fp / N : 0.0, P > 0 ? tp / P : 0.0});
  }
  if (P == 0 || N == 0) {
    // No positive-negative pair can be misordered.
    if (r.points.back().fpr < 1.0 || r.points.back().tpr < 1.0)
      r.points.push_back({scores.empty() ? 0.0 : scores[order.back()], 1.0, 1.0});
    r.auc = 1.0;
    return r;
  }
  for (std::size_t i = 1; i < r.points.size(); ++i)
    r.auc += (r.points[i].fpr - r.points[i - 1].fpr) * 0.5 * (r.points[i].tpr + r.points[i - 1].tpr);
  return r;
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  m.n = v.size();
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= double(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / double(v.size()));
  return m;
}

DetectionReport detection_metrics(const std::vector<std::vector<Detection>>& scored,
                                  const std::vector<CaseTruth>& truth, double operating_threshold,
                                  double match_dsi) {
  if (scored.size() != truth.size()) throw InvalidArgument("detection_metrics: one detection list per case");
  std::size_t lesions = 0;
  for (const auto& t : truth) lesions += t.lesions.size();
  if (lesions == 0) throw InvalidArgument("detection_metrics: no ground-truth lesion in any case");
  const std::size_t patients = patient_count(truth);

  struct CaseData {
    Edges edges;
    std::vector<std::vector<double>> d;
  };
  std::vector<CaseData> data(scored.size());
  std::vector<double> all_scores, roc_scores;
  std::vector<bool> roc_labels;
  for (std::size_t c = 0; c < scored.size(); ++c) {
    data[c].edges = overlap_edges(scored[c]);
    data[c].d = dsi_table(scored[c], truth[c]);
    for (std::size_t i = 0; i < scored[c].size(); ++i) {
      all_scores.push_back(scored[c][i].lesion_score);
      const auto& row = data[c].d[i];
      roc_scores.push_back(scored[c][i].lesion_score);
      roc_labels.push_back(!row.empty() && *std::max_element(row.begin(), row.end()) >= match_dsi);
    }
  }

  auto evaluate = [&](double t, std::vector<double>* seg) {
    OperatingPoint op;
    op.threshold = t;
    for (std::size_t c = 0; c < scored.size(); ++c) {
      std::vector<bool> alive(scored[c].size());
      for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = scored[c][i].lesion_score >= t;
      const auto keep = fuse(scored[c], data[c].edges, alive);
      std::vector<double> best(truth[c].lesions.size(), -1.0);
      for (std::size_t i : keep) {
        bool matched = false;
        for (std::size_t l = 0; l < best.size(); ++l) {
          const double s = data[c].d[i][l];
          if (s >= match_dsi) {
            matched = true;
            best[l] = std::max(best[l], s);
          }
        }
        if (!matched) ++op.false_positives;
      }
      for (double b : best) {
        if (b < 0) continue;
        ++op.detected;
        if (seg) seg->push_back(b);
      }
    }
    op.tpr = double(op.detected) / double(lesions);
    op.fpp = double(op.false_positives) / double(patients);
    return op;
  };

  DetectionReport r;
  r.froc.lesions = lesions;
  r.froc.patients = patients;
  for (double t : sweep(all_scores)) {
    const OperatingPoint op = evaluate(t, nullptr);
    r.froc.points.push_back({t, op.tpr, op.fpp, op.detected, op.false_positives});
  }
  r.roc = roc_curve(roc_scores, roc_labels);
  std::vector<double> seg;
  r.operating = evaluate(operating_threshold, &seg);
  const MeanStd ms = mean_std(seg);
  r.operating.segmentation_dsi = std::move(seg);
  r.operating.mean_dsi = ms.mean;
  r.operating.std_dsi = ms.std;
  return r;
}

MeanStd arcg(const std::vector<std::vector<Region>>& candidates, const std::vector<CaseTruth>& truth,
             std::vector<double>* per_lesion) {
  if (candidates.size() != truth.size()) throw InvalidArgument("arcg: one candidate list per case");
  std::vector<double> best;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    for (const Region& g : truth[c].lesions) {
      double b = 0.0;
      for (const Region& r : candidates[c]) b = std::max(b, dsi(r, g));
      best.push_back(b);
    }
  }
  const MeanStd m = mean_std(best);
  if (per_lesion) *per_lesion = std::move(best);
  return m;
}

MalignancyReport malignancy_metrics(const std::vector<std::vector<Detection>>& detections,
                                    const std::vector<CaseTruth>& truth, double match_dsi) {
  if (detections.size() != truth.size()) throw InvalidArgument("malignancy_metrics: one detection list per case");
  MalignancyReport r;
  const std::size_t patients = patient_count(truth);
  for (const auto& t : truth) {
    if (t.malignant.size() != t.lesions.size()) throw InvalidArgument("malignancy_metrics: one label per lesion");
    r.malignant_lesions += static_cast<std::size_t>(std::count(t.malignant.begin(), t.malignant.end(), true));
  }

  std::vector<std::vector<std::vector<double>>> d(detections.size());
  std::vector<double> scores, roc_scores, lesion_scores;
  std::vector<bool> roc_labels, lesion_labels;
  for (std::size_t c = 0; c < detections.size(); ++c) {
    d[c] = dsi_table(detections[c], truth[c]);
    for (std::size_t i = 0; i < detections[c].size(); ++i) {
      const double s = detections[c][i].malignancy_score;
      scores.push_back(s);
      bool hits_malignant = false;
      double best = -1;
      bool best_malignant = false;
      for (std::size_t l = 0; l < truth[c].lesions.size(); ++l) {
        const double x = d[c][i][l];
        if (x < match_dsi) continue;
        hits_malignant = hits_malignant || truth[c].malignant[l];
        if (x > best) {
          best = x;
          best_malignant = truth[c].malignant[l];
        }
      }
      roc_scores.push_back(s);
      roc_labels.push_back(hits_malignant);
      if (best >= 0) {
        lesion_scores.push_back(s);
        lesion_labels.push_back(best_malignant);
      }
    }
  }
  r.roc = roc_curve(roc_scores, roc_labels);
  r.lesion_roc = roc_curve(lesion_scores, lesion_labels);

  r.froc.lesions = r.malignant_lesions;
  r.froc.patients = patients;
  for (double t : sweep(scores)) {
    FrocPoint p;
    p.threshold = t;
    for (std::size_t c = 0; c < detections.size(); ++c) {
      std::vector<bool> hit(truth[c].lesions.size(), false);
      for (std::size_t i = 0; i < detections[c].size(); ++i) {
        if (detections[c][i].malignancy_score < t) continue;
        bool matched = false;
        for (std::size_t l = 0; l < hit.size(); ++l) {
          if (truth[c].malignant[l] && d[c][i][l] >= match_dsi) {
            matched = true;
            hit[l] = true;
          }
        }
        if (!matched) ++p.false_positives;
      }
      p.true_positives += static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
    }
    p.tpr = r.malignant_lesions ? double(p.true_positives) / double(r.malignant_lesions) : 0.0;
    p.fpp = patients ? double(p.false_positives) / double(patients) : 0.0;
    r.froc.points.push_back(p);
  }
  return r;
}

}  // namespace siftcad
