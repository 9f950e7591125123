#include "siftcad/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace siftcad {
namespace {

// Moving a cut across empty bins leaves every class unchanged, so the
// objective is flat there. Pick the middle of such a gap rather than its
// left end; a cut sharing its gap with another cut stays put.
void center_in_gaps(std::span<const double> counts, std::vector<std::size_t>& cuts) {
  const std::size_t L = counts.size();
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    std::size_t a = cuts[k];
    while (a > 0 && counts[a] == 0.0) --a;
    std::size_t b = cuts[k];
    while (b + 2 < L && counts[b + 1] == 0.0) ++b;
    const bool shared = (k > 0 && cuts[k - 1] >= a) || (k + 1 < cuts.size() && cuts[k + 1] <= b);
    if (!shared) cuts[k] = a + (b - a) / 2;
  }
}

}  // namespace

Histogram masked_histogram(const Volume3D& v, const BinaryMask* mask, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("histogram: need at least 2 bins");
  if (mask) require_same_geometry(v, *mask, "histogram");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
    ++n;
  }
  if (n == 0) throw DegenerateInput("histogram: empty selection");
  if (!(hi > lo)) throw DegenerateInput("histogram: constant input (degenerate histogram)");

  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0.0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    auto b = static_cast<std::size_t>((v[i] - lo) * scale);
    h.counts[std::min(b, bins - 1)] += 1.0;
  }
  return h;
}

std::size_t otsu_index(std::span<const double> counts) {
  const std::size_t L = counts.size();
  if (L < 2) throw InvalidArgument("otsu: need at least 2 bins");
  double total = 0.0, mu_total = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    total += counts[i];
    mu_total += static_cast<double>(i) * counts[i];
  }
  if (!(total > 0.0)) throw DegenerateInput("otsu: empty histogram");
  mu_total /= total;

  double omega = 0.0, mu = 0.0;
  double best = -1.0;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k + 1 < L; ++k) {
    omega += counts[k] / total;
    mu += static_cast<double>(k) * counts[k] / total;
    const double denom = omega * (1.0 - omega);
    const double sigma = denom > 0.0 ? (mu_total * omega - mu) * (mu_total * omega - mu) / denom : 0.0;
    if (sigma > best) {
      best = sigma;
      best_k = k;
    }
  }
  std::vector<std::size_t> cut{best_k};
  center_in_gaps(counts, cut);
  return cut[0];
}

double otsu_threshold(const Volume3D& v) {
  const Histogram h = masked_histogram(v, nullptr);
  return h.edge(otsu_index(h.counts) + 1);
}

double otsu_threshold(const Volume3D& v, const BinaryMask& mask) {
  const Histogram h = masked_histogram(v, &mask);
  return h.edge(otsu_index(h.counts) + 1);
}

std::vector<std::size_t> multilevel_otsu_indices(std::span<const double> counts, std::size_t levels) {
  const std::size_t L = counts.size();
  if (levels < 1) throw InvalidArgument("multilevel otsu: need at least one threshold");
  if (levels + 1 > L) throw InvalidArgument("multilevel otsu: more classes than bins");
  double total = 0.0;
  for (double c : counts) total += c;
  if (!(total > 0.0)) throw DegenerateInput("multilevel otsu: empty histogram");

  // Lookup table H(u,v) = S(u,v)^2 / P(u,v), built row by row.
  std::vector<double> H(L * L, 0.0);
  for (std::size_t u = 0; u < L; ++u) {
    double P = 0.0, S = 0.0;
    for (std::size_t v = u; v < L; ++v) {
      const double p = counts[v] / total;
      P += p;
      S += static_cast<double>(v) * p;
      H[u * L + v] = P > 0.0 ? S * S / P : 0.0;
    }
  }

  // best[k][v]: max objective of classes 0..k with class k ending at bin v.
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> best((levels + 1) * L, neg_inf);
  std::vector<std::size_t> start((levels + 1) * L, 0);
  for (std::size_t v = 0; v < L; ++v) best[v] = H[v];
  for (std::size_t k = 1; k <= levels; ++k) {
    for (std::size_t v = k; v < L; ++v) {
      double b = neg_inf;
      std::size_t arg = k;
      for (std::size_t u = k; u <= v; ++u) {
        const double prev = best[(k - 1) * L + (u - 1)];
        if (prev == neg_inf) continue;
        const double cand = prev + H[u * L + v];
        if (cand > b) {
          b = cand;
          arg = u;
        }
      }
      best[k * L + v] = b;
      start[k * L + v] = arg;
    }
  }

  std::vector<std::size_t> thresholds(levels);
  std::size_t v = L - 1;
  for (std::size_t k = levels; k >= 1; --k) {
    const std::size_t u = start[k * L + v];
    thresholds[k - 1] = u - 1;
    v = u - 1;
  }
  center_in_gaps(counts, thresholds);
  return thresholds;
}

ThresholdSet multilevel_otsu(const Volume3D& v, const BinaryMask& mask, std::size_t levels, std::size_t bins) {
  require_same_geometry(v, mask, "multilevel_otsu");
  std::set<double> distinct;
  for (std::size_t i = 0; i < v.size() && distinct.size() <= levels; ++i) {
    if (mask[i]) distinct.insert(v[i]);
  }
  if (distinct.size() < levels + 1) {
    throw DegenerateInput("multilevel otsu: fewer than T+1 distinct values within mask");
  }
  ThresholdSet out;
  out.histogram = masked_histogram(v, &mask, bins);
  out.bin_indices = multilevel_otsu_indices(out.histogram.counts, levels);
  out.values.reserve(levels);
  for (auto k : out.bin_indices) out.values.push_back(out.histogram.edge(k + 1));
  return out;
}

BinaryMask binarize(const Volume3D& v, double threshold) {
  BinaryMask out(v.dims(), v.spacing(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace siftcad
