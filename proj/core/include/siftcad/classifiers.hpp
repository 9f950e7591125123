#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "siftcad/candidates.hpp"
#include "siftcad/features.hpp"
#include "siftcad/region.hpp"

namespace siftcad {

struct LabeledSample {
  FeatureVector features;
  int label = -1;     ///< +1 or -1
  std::string group;  ///< case id; cross-validation never splits a group
};

/// Dense row-major view of a sample list used by the learners.
struct Dataset {
  std::size_t rows = 0, cols = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::string schema;
  std::vector<std::string> names;

  /// Throws InvalidArgument on mixed schemas, non-finite values or labels
  /// other than +-1.
  static Dataset from_samples(const std::vector<LabeledSample>& samples);
  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  std::size_t positives() const;
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1, right = -1;  ///< x[feature] <= threshold goes left
  double value = 0.5;         ///< weighted fraction of positives
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;

  /// Positive-class probability of the leaf reached by x.
  double predict(std::span<const double> x) const;
  std::size_t split_count() const;
};

struct TreeParams {
  std::size_t max_splits = std::numeric_limits<std::size_t>::max();
  std::size_t m_try = 0;  ///< 0 = every feature at every split
  std::uint64_t seed = 0;  ///< feature subsets when m_try is set
};

/// CART on weighted samples: weighted Gini, nodes split breadth first until
/// max_splits is reached. An impure node is split whenever some feature
/// takes two values in it, even when no split lowers the impurity; ties go
/// to the lowest feature index and then the lowest threshold. `rows` selects
/// the training rows and `weights` (same length) their weights.
DecisionTree train_tree(const Dataset& d, std::span<const std::size_t> rows, std::span<const double> weights,
                        const TreeParams& p);
DecisionTree train_tree(const std::vector<LabeledSample>& samples, std::size_t max_splits,
                        std::size_t m_try = 0, const std::vector<double>* weights = nullptr,
                        std::uint64_t seed = 0);

class Classifier {
 public:
  virtual ~Classifier() = default;
  /// Positive-class probability in [0, 1].
  virtual double predict(std::span<const double> x) const = 0;
  /// Checks the schema first; throws InvalidArgument on mismatch.
  double predict(const FeatureVector& f) const;

  std::string schema;
  std::vector<std::string> feature_names;
};

struct RusBoostParams {
  std::size_t n_trees = 2000;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
  /// 0 = number of training samples.
  std::size_t max_splits = 0;
  /// Fresh subsamples tried for a round whose weighted error is >= 0.5
  /// before boosting stops early.
  int max_retries = 10;
};

class RusBoostModel : public Classifier {
 public:
  std::vector<DecisionTree> trees;
  std::vector<double> alpha;
  double learning_rate = 0.1;
  std::size_t rounds_requested = 0;
  bool stopped_early = false;

  /// Logistic of the normalized margin sum(alpha h) / sum(alpha), with
  /// h = +-1 the tree votes, at temperature kMarginScale. An empty model
  /// gives 0.5.
  double predict(std::span<const double> x) const override;
  using Classifier::predict;
  /// The same using only the first `n` rounds.
  double predict_prefix(std::span<const double> x, std::size_t n) const;
  double margin(std::span<const double> x, std::size_t n) const;

  static constexpr double kMarginScale = 5.0;
};

/// Random under-sampling boosting: each round keeps every minority sample
/// and draws as many majority samples without replacement, with probability
/// following the current boosting weights; trains a weighted tree on that
/// balanced subset and applies an AdaBoost.M1 update scaled by the learning
/// rate (error measured on all samples).
RusBoostModel train_rusboost(const std::vector<LabeledSample>& samples, const RusBoostParams& p = {});
RusBoostModel train_rusboost(const Dataset& d, const RusBoostParams& p = {});

struct RfGridPoint {
  std::size_t n_tree = 0, m_try = 0;
  double oob_mse = 0.0;
  double oob_accuracy = 0.0;  ///< sign of 2p - 1 matches the label; a tie counts as wrong
};

struct RandomForestParams {
  std::vector<std::size_t> n_tree_grid{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::vector<std::size_t> m_try_grid;  ///< empty = default_m_try_grid(features)
  std::uint64_t seed = 1;
};

class RandomForestModel : public Classifier {
 public:
  std::vector<DecisionTree> trees;
  std::size_t m_try = 1;
  double oob_mse = 0.0;
  std::vector<RfGridPoint> grid;  ///< every evaluated grid point

  /// Fraction of trees voting positive (a tree whose leaf is exactly 0.5
  /// casts half a vote).
  double predict(std::span<const double> x) const override;
  using Classifier::predict;
  std::size_t n_tree() const { return trees.size(); }
};

/// ceil(0.5 sqrt(nf)) to ceil(2 sqrt(nf)) in 4 evenly rounded steps,
/// clamped to [1, nf], duplicates dropped.
std::vector<std::size_t> default_m_try_grid(std::size_t nf);

/// Bootstrap forest of fully grown trees, m_try features per split. For
/// each m_try the largest forest is grown once; smaller grid sizes are its
/// leading trees, so a grid point's model is exactly what training at that
/// setting on all samples yields. Selection by lowest out-of-bag MSE of
/// 2p - 1 against the labels; ties go to fewer trees, then smaller m_try.
RandomForestModel train_rf(const std::vector<LabeledSample>& samples, const RandomForestParams& p = {});
RandomForestModel train_rf(const Dataset& d, const RandomForestParams& p = {});

/// Three-way training labels from DSIs at the original resolution: for each
/// lesion the candidate with the highest DSI (lowest index on ties) is
/// positive when that DSI is at least 0.6; a candidate whose DSI to every
/// lesion is below 0.2 is negative; everything else is neutral.
std::vector<CandidateLabel> assign_training_labels(const std::vector<Region>& candidates,
                                                   const std::vector<Region>& lesions);
/// Same, on candidates (upscaled internally); sets each candidate's label.
void assign_training_labels(std::vector<RegionCandidate>& cands, const std::vector<BinaryMask>& ground_truth);

using Trainer = std::function<std::unique_ptr<Classifier>(const std::vector<LabeledSample>&)>;

/// Fold of every sample: groups in order of first appearance, dealt round
/// robin. Throws InvalidArgument if k exceeds the number of groups.
std::vector<std::size_t> group_folds(const std::vector<LabeledSample>& samples, std::size_t k);

/// Mean over held-out samples of (2p - 1 - label)^2.
double cross_validate(const std::vector<LabeledSample>& samples, std::size_t k, const Trainer& trainer);

/// Versioned JSON with schema id, hyperparameters and every tree.
void save_model(const RusBoostModel& m, const std::filesystem::path& path);
void save_model(const RandomForestModel& m, const std::filesystem::path& path);
RusBoostModel load_rusboost(const std::filesystem::path& path);
RandomForestModel load_random_forest(const std::filesystem::path& path);

}  // namespace siftcad
