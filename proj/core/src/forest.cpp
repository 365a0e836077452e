#include "ubf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ubf/error.hpp"
#include "ubf/parallel.hpp"
#include "ubf/random.hpp"

namespace ubf {

namespace {

constexpr int kFormatVersion = 1;
constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();

struct Canonical {
  Matrix x;
  std::vector<int> y;
  std::vector<double> w;
  std::vector<std::size_t> from_input;  // input row -> canonical row or kDropped
};

Canonical canonicalize(const Matrix& x, std::span<const int> labels,
                       std::span<const double> weights) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] > 0.0) order.push_back(i);
  }
  // Weight is the last key so that merged weights are summed in an order
  // that does not depend on the input order.
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a);
    const auto rb = x.row(b);
    for (std::size_t k = 0; k < ra.size(); ++k) {
      if (ra[k] != rb[k]) return ra[k] < rb[k];
    }
    const int ya = labels[a] != 0 ? 1 : 0;
    const int yb = labels[b] != 0 ? 1 : 0;
    if (ya != yb) return ya < yb;
    return weights[a] < weights[b];
  };
  std::sort(order.begin(), order.end(), less);

  Canonical out;
  out.from_input.assign(n, kDropped);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const int yi = labels[i] != 0 ? 1 : 0;
    const bool same_as_last = !out.y.empty() && out.y.back() == yi &&
                              std::equal(x.row(i).begin(), x.row(i).end(),
                                         out.x.row(out.x.rows() - 1).begin());
    if (same_as_last) {
      out.w.back() += weights[i];
    } else {
      out.x.append_row(x.row(i));
      out.y.push_back(yi);
      out.w.push_back(weights[i]);
    }
    out.from_input[i] = out.x.rows() - 1;
  }
  return out;
}

class TreeBuilder {
 public:
  TreeBuilder(const Canonical& data, std::span<const double> weights, const ForestParams& params,
              std::size_t features_per_split, Rng& rng)
      : data_(data),
        w_(weights),
        params_(params),
        per_split_(features_per_split),
        rng_(rng),
        feature_order_(data.x.cols()) {
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
  }

  DecisionTree build() {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] > 0.0) rows.push_back(i);
    }
    grow(rows, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    double pos = 0.0;
    double total = 0.0;
    for (std::size_t i : rows) {
      total += w_[i];
      if (data_.y[i]) pos += w_[i];
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[id].value = total > 0.0 ? pos / total : 0.0;

    const bool pure = pos <= 0.0 || pos >= total;
    if (pure || depth >= params_.max_depth || total < 2.0 * params_.min_leaf_weight) return id;

    const Split split = best_split(rows);
    if (!split.found) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : rows) {
      (data_.x(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = static_cast<int>(split.feature);
    nodes_[id].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows) {
    rng_.shuffle(std::span<std::size_t>(feature_order_));
    Split best;
    const double min_leaf = params_.min_leaf_weight;
    for (std::size_t visited = 0; visited < feature_order_.size(); ++visited) {
      // Keep looking past the subsample only until some valid split exists.
      if (visited >= per_split_ && best.found) break;
      const std::size_t f = feature_order_[visited];

      scratch_.clear();
      for (std::size_t i : rows) scratch_.push_back({data_.x(i, f), i});
      std::sort(scratch_.begin(), scratch_.end());

      double total = 0.0;
      double total_pos = 0.0;
      for (const auto& [v, i] : scratch_) {
        total += w_[i];
        if (data_.y[i]) total_pos += w_[i];
      }
      double left = 0.0;
      double left_pos = 0.0;
      for (std::size_t k = 0; k + 1 < scratch_.size(); ++k) {
        const std::size_t i = scratch_[k].second;
        left += w_[i];
        if (data_.y[i]) left_pos += w_[i];
        const double a = scratch_[k].first;
        const double b = scratch_[k + 1].first;
        if (a == b) continue;
        const double right = total - left;
        if (left < min_leaf || right < min_leaf) continue;
        const double right_pos = total_pos - left_pos;
        // Weighted Gini of the children, up to a constant factor of 2.
        const double score = left_pos * (left - left_pos) / left +
                             right_pos * (right - right_pos) / right;
        if (score < best.score) {
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = {true, f, t, score};
        }
      }
    }
    return best;
  }

  const Canonical& data_;
  std::span<const double> w_;
  const ForestParams& params_;
  std::size_t per_split_;
  Rng& rng_;
  std::vector<std::size_t> feature_order_;
  std::vector<std::pair<double, std::size_t>> scratch_;
  std::vector<TreeNode> nodes_;
};

void validate_inputs(const Matrix& x, std::span<const int> labels,
                     std::span<const double> weights, const ForestParams& params) {
  if (labels.size() != x.rows() || weights.size() != x.rows()) {
    throw LengthMismatch("forest fit: " + std::to_string(x.rows()) + " rows, " +
                         std::to_string(labels.size()) + " labels, " +
                         std::to_string(weights.size()) + " weights");
  }
  if (params.n_trees == 0) throw DataError("forest fit: n_trees must be positive");
  if (!(params.min_leaf_weight > 0.0)) throw DataError("forest fit: min_leaf_weight must be positive");
  if (params.feature_subsample < 0.0 || params.feature_subsample > 1.0) {
    throw DataError("forest fit: feature_subsample must lie in [0, 1]");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("forest fit: non-finite feature value");
  }
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw DataError("forest fit: weights must be finite and non-negative");
    }
    (labels[i] != 0 ? pos : neg) += weights[i];
  }
  if (pos <= 0.0 || neg <= 0.0) {
    throw DegenerateLabels("forest fit: both classes need positive total weight");
  }
}

TreeEnsemble fit_impl(const Matrix& x, std::span<const int> labels,
                      std::span<const double> weights, const ForestParams& params,
                      std::vector<double>* oob) {
  validate_inputs(x, labels, weights, params);
  const Canonical data = canonicalize(x, labels, weights);
  const std::size_t m = data.x.rows();
  const std::size_t p = data.x.cols();
  const double fraction =
      params.feature_subsample > 0.0 ? params.feature_subsample : 1.0 / std::sqrt(static_cast<double>(p));
  const std::size_t per_split =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(fraction * static_cast<double>(p) + 1e-9)), 1, p);

  std::vector<double> cumulative(m);
  std::partial_sum(data.w.begin(), data.w.end(), cumulative.begin());
  const double total = cumulative.back();

  std::vector<DecisionTree> trees(params.n_trees);
  std::vector<std::vector<bool>> in_bag(oob ? params.n_trees : 0);
  parallel_for(params.n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<double> tree_w;
    if (params.bootstrap) {
      tree_w.assign(m, 0.0);
      const double draw_weight = total / static_cast<double>(m);
      for (std::size_t d = 0; d < m; ++d) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        tree_w[static_cast<std::size_t>(it - cumulative.begin())] += draw_weight;
      }
    } else {
      tree_w = data.w;
    }
    TreeBuilder builder(data, tree_w, params, per_split, rng);
    trees[t] = builder.build();
    if (oob) {
      in_bag[t].resize(m);
      for (std::size_t i = 0; i < m; ++i) in_bag[t][i] = tree_w[i] > 0.0;
    }
  });

  TreeEnsemble model = TreeEnsemble::from_trees(std::move(trees), p, params);
  if (oob) {
    std::vector<double> canon_oob(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t t = 0; t < params.n_trees; ++t) {
        if (in_bag[t][i]) continue;
        sum += model.trees()[t].predict(data.x.row(i));
        ++count;
      }
      canon_oob[i] = count ? sum / static_cast<double>(count) : model.predict_proba(data.x.row(i));
    }
    oob->assign(x.rows(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const std::size_t c = data.from_input[r];
      (*oob)[r] = c == kDropped ? model.predict_proba(x.row(r)) : canon_oob[c];
    }
  }
  return model;
}

}  // namespace

double DecisionTree::predict(std::span<const double> row) const {
  if (nodes_.empty()) return 0.0;
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const TreeNode& n = nodes_[id];
    id = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
  }
  return nodes_[id].value;
}

TreeEnsemble TreeEnsemble::fit(const Matrix& x, std::span<const int> labels,
                               std::span<const double> weights, const ForestParams& params) {
  return fit_impl(x, labels, weights, params, nullptr);
}

TreeEnsemble TreeEnsemble::fit_with_oob(const Matrix& x, std::span<const int> labels,
                                        std::span<const double> weights,
                                        const ForestParams& params, std::vector<double>& oob) {
  return fit_impl(x, labels, weights, params, &oob);
}

TreeEnsemble TreeEnsemble::from_trees(std::vector<DecisionTree> trees, std::size_t n_features,
                                      const ForestParams& params) {
  TreeEnsemble e;
  e.params_ = params;
  e.params_.n_trees = trees.size();
  e.n_features_ = n_features;
  e.trees_ = std::move(trees);
  return e;
}

double TreeEnsemble::predict_proba(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw FeatureMismatch("model expects " + std::to_string(n_features_) + " features, got " +
                          std::to_string(row.size()));
  }
  if (trees_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(row);
  return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

std::vector<double> TreeEnsemble::predict_proba(const Matrix& x) const {
  if (x.rows() > 0 && x.cols() != n_features_) {
    throw FeatureMismatch("model expects " + std::to_string(n_features_) + " features, got " +
                          std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_proba(x.row(r));
  return out;
}

nlohmann::json TreeEnsemble::to_json() const {
  nlohmann::json j;
  j["format"] = "ubf-forest";
  j["version"] = kFormatVersion;
  j["n_features"] = n_features_;
  j["params"] = {{"n_trees", params_.n_trees},
                 {"max_depth", params_.max_depth},
                 {"min_leaf_weight", params_.min_leaf_weight},
                 {"feature_subsample", params_.feature_subsample},
                 {"bootstrap", params_.bootstrap},
                 {"seed", params_.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    nlohmann::json feature = nlohmann::json::array();
    nlohmann::json threshold = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    nlohmann::json value = nlohmann::json::array();
    for (const auto& n : t.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  j["trees"] = std::move(trees);
  return j;
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ubf-forest") throw ParseError("not a forest model");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ParseError("unsupported forest model version");
    }
    ForestParams params;
    const auto& jp = j.at("params");
    params.n_trees = jp.at("n_trees").get<std::size_t>();
    params.max_depth = jp.at("max_depth").get<std::size_t>();
    params.min_leaf_weight = jp.at("min_leaf_weight").get<double>();
    params.feature_subsample = jp.at("feature_subsample").get<double>();
    params.bootstrap = jp.at("bootstrap").get<bool>();
    params.seed = jp.at("seed").get<std::uint64_t>();
    const auto n_features = j.at("n_features").get<std::size_t>();

    std::vector<DecisionTree> trees;
    for (const auto& jt : j.at("trees")) {
      const auto feature = jt.at("feature").get<std::vector<int>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int>>();
      const auto right = jt.at("right").get<std::vector<int>>();
      const auto value = jt.at("value").get<std::vector<double>>();
      const std::size_t k = feature.size();
      if (threshold.size() != k || left.size() != k || right.size() != k || value.size() != k) {
        throw ParseError("forest model: node arrays differ in length");
      }
      std::vector<TreeNode> nodes(k);
      for (std::size_t i = 0; i < k; ++i) {
        nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        const bool leaf = feature[i] < 0;
        const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(k); };
        if (!leaf && (feature[i] >= static_cast<int>(n_features) || !in_range(left[i]) ||
                      !in_range(right[i]))) {
          throw ParseError("forest model: malformed node " + std::to_string(i));
        }
      }
      trees.emplace_back(std::move(nodes));
    }
    if (trees.size() != params.n_trees) throw ParseError("forest model: tree count mismatch");
    return from_trees(std::move(trees), n_features, params);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("forest model: ") + e.what());
  }
}

}  // namespace ubf
