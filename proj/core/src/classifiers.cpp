#include "siftcad/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"
#include "siftcad/error.hpp"
#include "siftcad/metrics.hpp"
#include "siftcad/parallel.hpp"
#include "siftcad/rng.hpp"

namespace siftcad {

using nlohmann::json;

Dataset Dataset::from_samples(const std::vector<LabeledSample>& samples) {
  Dataset d;
  if (samples.empty()) return d;
  d.rows = samples.size();
  d.cols = samples[0].features.size();
  d.schema = samples[0].features.schema;
  d.names = samples[0].features.names;
  d.x.reserve(d.rows * d.cols);
  for (const auto& s : samples) {
    if (s.features.size() != d.cols || s.features.schema != d.schema)
      throw InvalidArgument("samples mix feature schemas");
    if (s.label != 1 && s.label != -1) throw InvalidArgument("sample label must be +1 or -1");
    for (double v : s.features.values) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
      d.x.push_back(v);
    }
    d.y.push_back(s.label);
  }
  return d;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
}

double DecisionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.5;
  std::size_t n = 0;
  while (nodes[n].feature >= 0) {
    const TreeNode& t = nodes[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(t.feature)] <= t.threshold ? t.left : t.right);
  }
  return nodes[n].value;
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& t) { return t.feature >= 0; }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

// Sum of p^2/w over both children minus the parent's, i.e. the drop in
// weighted Gini impurity w - (p^2 + n^2) / w.
double purity(double p, double n) {
  const double w = p + n;
  return w > 0 ? (p * p + n * n) / w : 0.0;
}

struct Sample {
  std::size_t row;
  double w;
};

Split best_split(const Dataset& d, const std::vector<Sample>& node, const std::vector<std::size_t>& features) {
  double P = 0, N = 0;
  for (const auto& s : node) (d.y[s.row] > 0 ? P : N) += s.w;
  const double parent = purity(P, N);
  const double tol = 1e-12 * (P + N);
  Split best;
  std::vector<std::pair<double, double>> vals(node.size());  // (value, signed weight)
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < node.size(); ++i)
      vals[i] = {d.x[node[i].row * d.cols + f], d.y[node[i].row] > 0 ? node[i].w : -node[i].w};
    std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double lp = 0, ln = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      (vals[i].second > 0 ? lp : ln) += std::abs(vals[i].second);
      if (!(vals[i].first < vals[i + 1].first)) continue;
      const double gain = purity(lp, ln) + purity(P - lp, N - ln) - parent;
      if (gain > best.gain + tol) {
        double thr = 0.5 * (vals[i].first + vals[i + 1].first);
        if (!(thr < vals[i + 1].first)) thr = vals[i].first;
        best = {static_cast<int>(f), thr, gain};
      }
    }
  }
  return best;
}

}  // namespace

DecisionTree train_tree(const Dataset& d, std::span<const std::size_t> rows, std::span<const double> weights,
                        const TreeParams& p) {
  if (rows.size() != weights.size()) throw InvalidArgument("train_tree: rows and weights differ in length");
  if (rows.empty()) throw DegenerateInput("train_tree: no samples");
  if (p.m_try > d.cols) throw InvalidArgument("train_tree: m_try exceeds the feature count");

  DecisionTree tree;
  Rng rng(p.seed);
  std::vector<std::size_t> all(d.cols);
  std::iota(all.begin(), all.end(), 0);

  struct Pending {
    std::size_t node;
    std::vector<Sample> samples;
  };
  std::deque<Pending> queue;
  std::vector<Sample> root;
  for (std::size_t i = 0; i < rows.size(); ++i) root.push_back({rows[i], weights[i]});
  tree.nodes.emplace_back();
  queue.push_back({0, std::move(root)});
  std::size_t splits = 0;

  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    double P = 0, N = 0;
    for (const auto& s : cur.samples) (d.y[s.row] > 0 ? P : N) += s.w;
    tree.nodes[cur.node].value = P + N > 0 ? P / (P + N) : 0.5;
    if (P <= 0 || N <= 0 || splits >= p.max_splits) continue;

    std::vector<std::size_t> features;
    if (p.m_try == 0 || p.m_try == d.cols) {
      features = all;
    } else {
      std::vector<std::size_t> perm = all;
      for (std::size_t i = 0; i < p.m_try; ++i) std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);
      features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(p.m_try));
      std::sort(features.begin(), features.end());
    }
    const Split s = best_split(d, cur.samples, features);
    if (s.feature < 0) continue;

    std::vector<Sample> left, right;
    for (const auto& x : cur.samples)
      (d.x[x.row * d.cols + static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(x);
    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& n = tree.nodes[cur.node];
    n.feature = s.feature;
    n.threshold = s.threshold;
    n.left = li;
    n.right = li + 1;
    ++splits;
    queue.push_back({static_cast<std::size_t>(li), std::move(left)});
    queue.push_back({static_cast<std::size_t>(li + 1), std::move(right)});
  }
  return tree;
}

DecisionTree train_tree(const std::vector<LabeledSample>& samples, std::size_t max_splits, std::size_t m_try,
                        const std::vector<double>* weights, std::uint64_t seed) {
  const Dataset d = Dataset::from_samples(samples);
  std::vector<std::size_t> rows(d.rows);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> w = weights ? *weights : std::vector<double>(d.rows, 1.0);
  return train_tree(d, rows, w, TreeParams{max_splits, m_try, seed});
}

double Classifier::predict(const FeatureVector& f) const {
  if (f.schema != schema || f.size() != feature_names.size())
    throw InvalidArgument("feature schema '" + f.schema + "' does not match model schema '" + schema + "'");
  return predict(std::span<const double>(f.values));
}

namespace {
int vote(double p) { return p > 0.5 ? 1 : (p < 0.5 ? -1 : 0); }
}  // namespace

double RusBoostModel::margin(std::span<const double> x, std::size_t n) const {
  n = std::min(n, trees.size());
  double s = 0, a = 0;
  for (std::size_t t = 0; t < n; ++t) {
    s += alpha[t] * vote(trees[t].predict(x));
    a += alpha[t];
  }
  return a > 0 ? s / a : 0.0;
}

double RusBoostModel::predict_prefix(std::span<const double> x, std::size_t n) const {
  return 1.0 / (1.0 + std::exp(-kMarginScale * margin(x, n)));
}

double RusBoostModel::predict(std::span<const double> x) const { return predict_prefix(x, trees.size()); }

RusBoostModel train_rusboost(const Dataset& d, const RusBoostParams& p) {
  const std::size_t pos = d.positives();
  if (pos == 0 || pos == d.rows) throw DegenerateInput("train_rusboost: both classes are required");
  const int minority_label = pos <= d.rows - pos ? 1 : -1;
  std::vector<std::size_t> minority, majority;
  for (std::size_t i = 0; i < d.rows; ++i) (d.y[i] == minority_label ? minority : majority).push_back(i);

  RusBoostModel m;
  m.schema = d.schema;
  m.feature_names = d.names;
  m.learning_rate = p.learning_rate;
  m.rounds_requested = p.n_trees;
  const std::size_t max_splits = p.max_splits ? p.max_splits : d.rows;

  Rng rng(p.seed);
  std::vector<double> D(d.rows, 1.0 / static_cast<double>(d.rows));
  std::vector<std::pair<double, std::size_t>> keys(majority.size());
  std::vector<int> h(d.rows);

  for (std::size_t round = 0; round < p.n_trees; ++round) {
    bool accepted = false;
    for (int attempt = 0; attempt <= p.max_retries && !accepted; ++attempt) {
      // Weighted sampling without replacement: largest log(u) / w keys.
      for (std::size_t i = 0; i < majority.size(); ++i) {
        const double w = D[majority[i]];
        const double u = 1.0 - rng.uniform();
        keys[i] = {w > 0 ? std::log(u) / w : -std::numeric_limits<double>::infinity(), majority[i]};
      }
      const std::size_t take = std::min(minority.size(), majority.size());
      std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take), keys.end(),
                        [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
      std::vector<std::size_t> rows = minority;
      for (std::size_t i = 0; i < take; ++i) rows.push_back(keys[i].second);
      std::sort(rows.begin(), rows.end());
      std::vector<double> w(rows.size());
      double wsum = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) wsum += (w[i] = D[rows[i]]);
      for (double& x : w) x /= wsum;

      DecisionTree tree = train_tree(d, rows, w, TreeParams{max_splits, 0, 0});
      double eps = 0;
      for (std::size_t i = 0; i < d.rows; ++i) {
        h[i] = vote(tree.predict(d.row(i)));
        if (h[i] != d.y[i]) eps += D[i];
      }
      if (eps >= 0.5) continue;
      eps = std::max(eps, 1e-10);
      const double a = p.learning_rate * std::log((1.0 - eps) / eps);
      double total = 0;
      for (std::size_t i = 0; i < d.rows; ++i) {
        if (h[i] != d.y[i]) D[i] *= std::exp(a);
        total += D[i];
      }
      for (double& x : D) x /= total;
      m.trees.push_back(std::move(tree));
      m.alpha.push_back(a);
      accepted = true;
    }
    if (!accepted) {
      m.stopped_early = true;
      break;
    }
  }
  return m;
}

RusBoostModel train_rusboost(const std::vector<LabeledSample>& samples, const RusBoostParams& p) {
  return train_rusboost(Dataset::from_samples(samples), p);
}

double RandomForestModel::predict(std::span<const double> x) const {
  if (trees.empty()) return 0.5;
  double v = 0;
  for (const auto& t : trees) v += 0.5 * (vote(t.predict(x)) + 1);
  return v / static_cast<double>(trees.size());
}

std::vector<std::size_t> default_m_try_grid(std::size_t nf) {
  if (nf == 0) throw InvalidArgument("m_try grid: no features");
  const double r = std::sqrt(static_cast<double>(nf));
  const auto lo = static_cast<std::size_t>(std::ceil(0.5 * r));
  const auto hi = static_cast<std::size_t>(std::ceil(2.0 * r));
  std::vector<std::size_t> g;
  for (int k = 0; k < 4; ++k) {
    const auto v = lo + static_cast<std::size_t>(std::lround(double(k) * double(hi - lo) / 3.0));
    g.push_back(std::clamp<std::size_t>(v, 1, nf));
  }
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

RandomForestModel train_rf(const Dataset& d, const RandomForestParams& p) {
  const std::size_t pos = d.positives();
  if (pos == 0 || pos == d.rows) throw DegenerateInput("train_rf: both classes are required");
  if (p.n_tree_grid.empty()) throw InvalidArgument("train_rf: empty n_tree grid");
  std::vector<std::size_t> sizes = p.n_tree_grid;
  std::sort(sizes.begin(), sizes.end());
  if (sizes[0] == 0) throw InvalidArgument("train_rf: n_tree must be >= 1");
  const std::vector<std::size_t> mtry = p.m_try_grid.empty() ? default_m_try_grid(d.cols) : p.m_try_grid;
  for (std::size_t m : mtry)
    if (m < 1 || m > d.cols) throw InvalidArgument("train_rf: m_try outside [1, features]");
  const std::size_t n_max = sizes.back();

  RandomForestModel best;
  best.schema = d.schema;
  best.feature_names = d.names;
  bool have_best = false;
  std::vector<RfGridPoint> grid;

  for (std::size_t mi = 0; mi < mtry.size(); ++mi) {
    std::vector<DecisionTree> trees(n_max);
    std::vector<std::vector<std::uint8_t>> in_bag(n_max);
    parallel_for(n_max, [&](std::size_t t) {
      Rng rng(mix_seed(p.seed, mi * 1000003 + t));
      std::vector<double> counts(d.rows, 0.0);
      for (std::size_t i = 0; i < d.rows; ++i) counts[rng.below(d.rows)] += 1.0;
      std::vector<std::size_t> rows;
      std::vector<double> w;
      in_bag[t].assign(d.rows, 0);
      for (std::size_t i = 0; i < d.rows; ++i) {
        if (counts[i] > 0) {
          rows.push_back(i);
          w.push_back(counts[i]);
          in_bag[t][i] = 1;
        }
      }
      trees[t] = train_tree(d, rows, w, TreeParams{std::numeric_limits<std::size_t>::max(), mtry[mi], rng.next()});
    });

    std::vector<double> votes(d.rows, 0.0), seen(d.rows, 0.0);
    std::size_t next = 0;
    for (std::size_t t = 0; t < n_max; ++t) {
      for (std::size_t i = 0; i < d.rows; ++i) {
        if (in_bag[t][i]) continue;
        votes[i] += 0.5 * (vote(trees[t].predict(d.row(i))) + 1);
        seen[i] += 1;
      }
      if (t + 1 != sizes[next]) continue;
      double se = 0, correct = 0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < d.rows; ++i) {
        if (seen[i] == 0) continue;
        const double v = 2.0 * votes[i] / seen[i] - 1.0;
        se += (v - d.y[i]) * (v - d.y[i]);
        correct += v * d.y[i] > 0;
        ++n;
      }
      const double mse = n ? se / double(n) : 4.0;
      grid.push_back({t + 1, mtry[mi], mse, n ? correct / double(n) : 0.0});
      const bool better = !have_best || mse < best.oob_mse ||
                          (mse == best.oob_mse && (t + 1 < best.trees.size() ||
                                                   (t + 1 == best.trees.size() && mtry[mi] < best.m_try)));
      if (better) {
        have_best = true;
        best.trees.assign(trees.begin(), trees.begin() + static_cast<std::ptrdiff_t>(t + 1));
        best.m_try = mtry[mi];
        best.oob_mse = mse;
      }
      while (next < sizes.size() && sizes[next] == t + 1) ++next;
      if (next == sizes.size()) break;
    }
  }
  best.grid = std::move(grid);
  return best;
}

RandomForestModel train_rf(const std::vector<LabeledSample>& samples, const RandomForestParams& p) {
  return train_rf(Dataset::from_samples(samples), p);
}

std::vector<CandidateLabel> assign_training_labels(const std::vector<Region>& candidates,
                                                   const std::vector<Region>& lesions) {
  std::vector<CandidateLabel> labels(candidates.size(), CandidateLabel::Neutral);
  std::vector<double> best_dsi(candidates.size(), 0.0);
  std::vector<std::size_t> winners;
  for (const Region& g : lesions) {
    double top = -1;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double s = dsi(candidates[i], g);
      best_dsi[i] = std::max(best_dsi[i], s);
      if (s > top) {
        top = s;
        arg = i;
      }
    }
    if (top >= 0.6) winners.push_back(arg);
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (best_dsi[i] < 0.2) labels[i] = CandidateLabel::Negative;
  for (std::size_t i : winners) labels[i] = CandidateLabel::Positive;
  return labels;
}

void assign_training_labels(std::vector<RegionCandidate>& cands, const std::vector<BinaryMask>& ground_truth) {
  if (ground_truth.empty()) {
    for (auto& c : cands) c.label = CandidateLabel::Negative;
    return;
  }
  const Dims dims = ground_truth[0].dims();
  std::vector<Region> regions, lesions;
  for (const auto& c : cands) regions.push_back(original_region(c, dims));
  for (const auto& g : ground_truth) lesions.push_back(Region::from_mask(g));
  const auto labels = assign_training_labels(regions, lesions);
  for (std::size_t i = 0; i < cands.size(); ++i) cands[i].label = labels[i];
}

std::vector<std::size_t> group_folds(const std::vector<LabeledSample>& samples, std::size_t k) {
  if (k == 0) throw InvalidArgument("cross-validation needs k >= 1");
  std::map<std::string, std::size_t> order;
  std::vector<std::size_t> folds(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, fresh] = order.try_emplace(samples[i].group, order.size());
    folds[i] = it->second % k;
  }
  if (k > order.size())
    throw InvalidArgument("cross-validation: k = " + std::to_string(k) + " exceeds " +
                          std::to_string(order.size()) + " groups");
  return folds;
}

double cross_validate(const std::vector<LabeledSample>& samples, std::size_t k, const Trainer& trainer) {
  const auto folds = group_folds(samples, k);
  double se = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<LabeledSample> train;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (folds[i] != f) train.push_back(samples[i]);
    const auto model = trainer(train);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (folds[i] != f) continue;
      const double e = 2.0 * model->predict(samples[i].features) - 1.0 - samples[i].label;
      se += e * e;
    }
  }
  return se / static_cast<double>(samples.size());
}

namespace {

constexpr int kModelVersion = 1;

json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  for (const auto& n : j) {
    TreeNode x;
    x.feature = n.at(0).get<int>();
    x.threshold = n.at(1).get<double>();
    x.left = n.at(2).get<int>();
    x.right = n.at(3).get<int>();
    x.value = n.at(4).get<double>();
    t.nodes.push_back(x);
  }
  const int size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
      throw FormatError("model: tree node with invalid children");
  }
  return t;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path, const std::string& type) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "siftcad-model" || j.value("version", 0) != kModelVersion)
    throw FormatError(path.string() + ": not a version " + std::to_string(kModelVersion) + " siftcad model");
  if (j.value("type", "") != type) throw FormatError(path.string() + ": expected a " + type + " model");
  return j;
}

json header(const Classifier& c, const char* type) {
  return {{"format", "siftcad-model"}, {"version", kModelVersion}, {"type", type},
          {"schema", c.schema},        {"features", c.feature_names}};
}

template <class M>
void read_header(const json& j, M& m) {
  m.schema = j.at("schema").get<std::string>();
  m.feature_names = j.at("features").get<std::vector<std::string>>();
}

}  // namespace

void save_model(const RusBoostModel& m, const std::filesystem::path& path) {
  json j = header(m, "rusboost");
  j["learning_rate"] = m.learning_rate;
  j["rounds_requested"] = m.rounds_requested;
  j["stopped_early"] = m.stopped_early;
  j["margin_scale"] = RusBoostModel::kMarginScale;
  json trees = json::array();
  for (std::size_t t = 0; t < m.trees.size(); ++t)
    trees.push_back({{"alpha", m.alpha[t]}, {"nodes", tree_json(m.trees[t])}});
  j["trees"] = std::move(trees);
  write_json(j, path);
}

void save_model(const RandomForestModel& m, const std::filesystem::path& path) {
  json j = header(m, "random_forest");
  j["m_try"] = m.m_try;
  j["oob_mse"] = m.oob_mse;
  json grid = json::array();
  for (const auto& g : m.grid)
    grid.push_back({{"n_tree", g.n_tree}, {"m_try", g.m_try}, {"oob_mse", g.oob_mse}, {"oob_accuracy", g.oob_accuracy}});
  j["grid"] = std::move(grid);
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_json(t));
  j["trees"] = std::move(trees);
  write_json(j, path);
}

RusBoostModel load_rusboost(const std::filesystem::path& path) {
  const json j = read_json(path, "rusboost");
  RusBoostModel m;
  try {
    read_header(j, m);
    m.learning_rate = j.at("learning_rate").get<double>();
    m.rounds_requested = j.at("rounds_requested").get<std::size_t>();
    m.stopped_early = j.at("stopped_early").get<bool>();
    for (const auto& t : j.at("trees")) {
      m.alpha.push_back(t.at("alpha").get<double>());
      m.trees.push_back(tree_from_json(t.at("nodes")));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

RandomForestModel load_random_forest(const std::filesystem::path& path) {
  const json j = read_json(path, "random_forest");
  RandomForestModel m;
  try {
    read_header(j, m);
    m.m_try = j.at("m_try").get<std::size_t>();
    m.oob_mse = j.at("oob_mse").get<double>();
    for (const auto& g : j.at("grid"))
      m.grid.push_back({g.at("n_tree").get<std::size_t>(), g.at("m_try").get<std::size_t>(), g.at("oob_mse").get<double>(),
                        g.at("oob_accuracy").get<double>()});
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace siftcad
