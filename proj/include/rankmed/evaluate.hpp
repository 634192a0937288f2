#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rankmed/dataset.hpp"
#include "rankmed/error.hpp"
#include "rankmed/feature_matrix.hpp"

namespace rankmed {

struct TreeConfig {
  int max_depth = 12;
  std::size_t min_leaf = 2;
};

/// Binary CART tree with Gini splits. Thresholds sit at midpoints between
/// consecutive distinct values; a node splits whenever it is impure, the depth
/// allows it, and some split leaves min_leaf instances on both sides. Ties go
/// to the lowest feature index, then the lowest threshold; leaf ties go to the
/// lowest class code.
class DecisionTree {
 public:
  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t label = 0;
  };

  static DecisionTree fit(const FeatureMatrix& f, const LabelVector& labels, std::span<const std::size_t> subset,
                          const TreeConfig& config, std::span<const std::size_t> instances) {
    if (labels.size() != f.instances()) throw DomainError("label count does not match instance count");
    if (subset.empty()) throw DomainError("feature subset is empty");
    if (config.max_depth < 1) throw DomainError("max_depth must be >= 1");
    if (config.min_leaf < 1) throw DomainError("min_leaf must be >= 1");
    if (instances.empty()) throw DomainError("no training instances");

    std::vector<std::size_t> features(subset.begin(), subset.end());
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    if (features.back() >= f.features()) throw DomainError("feature index out of range");
    for (auto i : instances)
      if (i >= f.instances()) throw DomainError("instance index out of range");

    Builder b{f, labels, config, features, {}};
    // One sorted instance list per feature; partitioned in place at each split.
    std::vector<std::vector<std::size_t>> sorted(features.size(), std::vector<std::size_t>(instances.begin(), instances.end()));
    for (std::size_t k = 0; k < features.size(); ++k) {
      const auto row = f.row(features[k]);
      std::stable_sort(sorted[k].begin(), sorted[k].end(),
                       [&](std::size_t a, std::size_t c) { return row(static_cast<Eigen::Index>(a)) < row(static_cast<Eigen::Index>(c)); });
    }
    DecisionTree tree;
    b.grow(tree.nodes_, sorted, 0);
    return tree;
  }

  static DecisionTree fit(const FeatureMatrix& f, const LabelVector& labels, std::span<const std::size_t> subset,
                          const TreeConfig& config = {}) {
    std::vector<std::size_t> all(f.instances());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit(f, labels, subset, config, all);
  }

  /// `instance` is a full feature column (all m features).
  std::size_t predict(const Eigen::Ref<const Eigen::VectorXd>& instance) const {
    std::size_t k = 0;
    while (!nodes_[k].leaf)
      k = instance(static_cast<Eigen::Index>(nodes_[k].feature)) <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
    return nodes_[k].label;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  int depth() const { return depth_from(0); }

 private:
  int depth_from(std::size_t k) const {
    if (nodes_[k].leaf) return 0;
    return 1 + std::max(depth_from(nodes_[k].left), depth_from(nodes_[k].right));
  }

  struct Builder {
    const FeatureMatrix& f;
    const LabelVector& labels;
    const TreeConfig& config;
    const std::vector<std::size_t>& features;
    std::vector<char> goes_left;

    std::size_t grow(std::vector<Node>& nodes, std::vector<std::vector<std::size_t>>& sorted, int depth) {
      const auto& members = sorted.front();
      const std::size_t s = members.size();
      const std::size_t c = labels.classes();

      std::vector<std::size_t> counts(c, 0);
      for (auto i : members) ++counts[labels.code(i)];
      const std::size_t majority =
          static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());

      const std::size_t self = nodes.size();
      nodes.push_back(Node{true, 0, 0.0, 0, 0, majority});

      const bool pure = counts[majority] == s;
      if (pure || depth >= config.max_depth || s < 2 * config.min_leaf) return self;

      // Minimize sum over children of (size - sum_k count_k^2 / size), i.e. s * weighted Gini.
      double best_impurity = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      double best_threshold = 0.0;
      std::vector<std::size_t> left(c);
      for (std::size_t k = 0; k < features.size(); ++k) {
        const auto row = f.row(features[k]);
        std::fill(left.begin(), left.end(), 0);
        double left_sq = 0.0;
        double right_sq = 0.0;
        for (std::size_t l = 0; l < c; ++l) right_sq += static_cast<double>(counts[l]) * static_cast<double>(counts[l]);
        for (std::size_t p = 1; p < s; ++p) {
          const std::size_t moved = labels.code(sorted[k][p - 1]);
          const double lc = static_cast<double>(left[moved]);
          const double rc = static_cast<double>(counts[moved] - left[moved]);
          left_sq += 2.0 * lc + 1.0;
          right_sq -= 2.0 * rc - 1.0;
          ++left[moved];
          if (p < config.min_leaf || s - p < config.min_leaf) continue;
          const double lo = row(static_cast<Eigen::Index>(sorted[k][p - 1]));
          const double hi = row(static_cast<Eigen::Index>(sorted[k][p]));
          if (!(lo < hi)) continue;
          const double nl = static_cast<double>(p);
          const double nr = static_cast<double>(s - p);
          const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
          if (impurity < best_impurity) {
            best_impurity = impurity;
            best_k = k;
            double mid = lo + (hi - lo) / 2.0;
            if (!(mid < hi)) mid = lo;
            best_threshold = mid;
          }
        }
      }
      if (!(best_impurity < std::numeric_limits<double>::infinity())) return self;

      const auto split_row = f.row(features[best_k]);
      if (goes_left.size() < f.instances()) goes_left.assign(f.instances(), 0);
      for (auto i : members) goes_left[i] = split_row(static_cast<Eigen::Index>(i)) <= best_threshold ? 1 : 0;

      std::vector<std::vector<std::size_t>> left_sorted(features.size());
      std::vector<std::vector<std::size_t>> right_sorted(features.size());
      for (std::size_t k = 0; k < features.size(); ++k) {
        for (auto i : sorted[k]) (goes_left[i] ? left_sorted[k] : right_sorted[k]).push_back(i);
      }
      sorted.clear();
      sorted.shrink_to_fit();

      nodes[self].leaf = false;
      nodes[self].feature = features[best_k];
      nodes[self].threshold = best_threshold;
      const std::size_t l = grow(nodes, left_sorted, depth + 1);
      nodes[self].left = l;
      const std::size_t r = grow(nodes, right_sorted, depth + 1);
      nodes[self].right = r;
      return self;
    }
  };

  std::vector<Node> nodes_;
};

inline DecisionTree train_tree(const FeatureMatrix& f, const LabelVector& labels, std::span<const std::size_t> subset,
                               int max_depth, std::size_t min_leaf) {
  return DecisionTree::fit(f, labels, subset, TreeConfig{max_depth, min_leaf});
}

struct EvalResult {
  std::vector<double> tp_rate;  // per class: recall
  std::vector<double> fp_rate;  // per class: fraction of other-class instances predicted as this class
  double weighted_tp = 0.0;
  double weighted_fp = 0.0;
  std::vector<std::size_t> feature_subset;
  int folds = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [actual][predicted]
};

/// Fold of each instance under stratified assignment: the p-th instance of a
/// class (in index order) goes to fold p mod folds.
inline std::vector<int> stratified_folds(const LabelVector& labels, int folds) {
  std::vector<std::size_t> seen(labels.classes(), 0);
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<int>(seen[labels.code(i)]++ % static_cast<std::size_t>(folds));
  return out;
}

/// Stratified k-fold cross-validation of a decision tree on a feature subset.
inline EvalResult evaluate_subset(const FeatureMatrix& f, const LabelVector& labels,
                                  std::span<const std::size_t> subset, int folds, const TreeConfig& config = {}) {
  if (labels.size() != f.instances()) throw DomainError("label count does not match instance count");
  if (folds < 2) throw DomainError("folds must be >= 2");
  for (std::size_t l = 0; l < labels.classes(); ++l)
    if (labels.class_counts()[l] < static_cast<std::size_t>(folds))
      throw DomainError("class '" + labels.class_names()[l] + "' has " + std::to_string(labels.class_counts()[l]) +
                        " instances, fewer than " + std::to_string(folds) + " folds");

  const std::size_t c = labels.classes();
  const auto fold_of = stratified_folds(labels, folds);
  std::vector<std::vector<std::size_t>> confusion(c, std::vector<std::size_t>(c, 0));

  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold_of[i] == k ? test : train).push_back(i);
    const auto tree = DecisionTree::fit(f, labels, subset, config, train);
    for (auto i : test)
      ++confusion[labels.code(i)][tree.predict(f.values().col(static_cast<Eigen::Index>(i)))];
  }

  EvalResult out;
  out.folds = folds;
  out.feature_subset.assign(subset.begin(), subset.end());
  out.tp_rate.assign(c, 0.0);
  out.fp_rate.assign(c, 0.0);
  const double n = static_cast<double>(labels.size());
  for (std::size_t l = 0; l < c; ++l) {
    const double n_l = static_cast<double>(labels.class_counts()[l]);
    std::size_t predicted_as_l_by_others = 0;
    for (std::size_t a = 0; a < c; ++a)
      if (a != l) predicted_as_l_by_others += confusion[a][l];
    out.tp_rate[l] = static_cast<double>(confusion[l][l]) / n_l;
    out.fp_rate[l] = n - n_l > 0.0 ? static_cast<double>(predicted_as_l_by_others) / (n - n_l) : 0.0;
    out.weighted_tp += n_l / n * out.tp_rate[l];
    out.weighted_fp += n_l / n * out.fp_rate[l];
  }
  out.confusion = std::move(confusion);
  return out;
}

}  // namespace rankmed
