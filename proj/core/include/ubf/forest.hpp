#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubf/matrix.hpp"

namespace ubf {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  double min_leaf_weight = 2.0;
  /// Fraction of features drawn per split; 0 means sqrt(p)/p.
  double feature_subsample = 0.0;
  /// Weighted bootstrap per tree; off grows every tree on the full sample.
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     ///< rows with x[feature] <= threshold
  int right = -1;
  double value = 0.0;  ///< weighted positive fraction

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Random forest of weighted Gini trees producing probabilities.
///
/// Before fitting, rows are put in a canonical form: zero-weight rows are
/// dropped, rows are sorted by (features, label), and identical rows are
/// merged by summing weights. The fit is therefore independent of input row
/// order, a zero weight is the same as deleting the row, and splitting a row
/// into copies whose weights sum to the original changes nothing.
class TreeEnsemble {
 public:
  TreeEnsemble() = default;

  /// Throws DegenerateLabels when either class has zero total weight,
  /// LengthMismatch on inconsistent inputs and DataError on negative or
  /// non-finite weights.
  static TreeEnsemble fit(const Matrix& x, std::span<const int> labels,
                          std::span<const double> weights, const ForestParams& params);

  /// As fit, also writing per input row the mean prediction of the trees
  /// whose bootstrap sample left that row out (the full prediction when no
  /// tree did).
  static TreeEnsemble fit_with_oob(const Matrix& x, std::span<const int> labels,
                                   std::span<const double> weights,
                                   const ForestParams& params, std::vector<double>& oob);

  /// Mean leaf value over trees. Throws FeatureMismatch on a wrong width.
  double predict_proba(std::span<const double> row) const;
  std::vector<double> predict_proba(const Matrix& x) const;

  std::size_t n_features() const noexcept { return n_features_; }
  const ForestParams& params() const noexcept { return params_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  /// Builds an ensemble from existing trees (all predicting over n_features).
  static TreeEnsemble from_trees(std::vector<DecisionTree> trees, std::size_t n_features,
                                 const ForestParams& params = {});

  nlohmann::json to_json() const;
  static TreeEnsemble from_json(const nlohmann::json& j);

  friend bool operator==(const TreeEnsemble&, const TreeEnsemble&) = default;

 private:
  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<DecisionTree> trees_;
};

}  // namespace ubf
