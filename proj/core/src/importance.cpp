#include "ubf/importance.hpp"

#include <algorithm>
#include <numeric>

#include "ubf/error.hpp"
#include "ubf/parallel.hpp"
#include "ubf/random.hpp"
#include "ubf/stats.hpp"

namespace ubf {

std::string_view to_string(ImportanceMetric m) {
  switch (m) {
    case ImportanceMetric::Recall: return "recall";
    case ImportanceMetric::F1: return "f1";
    case ImportanceMetric::Auc: return "auc";
  }
  return "unknown";
}

std::optional<ImportanceMetric> parse_importance_metric(std::string_view text) {
  for (auto m : {ImportanceMetric::Recall, ImportanceMetric::F1, ImportanceMetric::Auc}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

double evaluate_metric(const PUModel& model, const Matrix& x, std::span<const int> labels,
                       ImportanceMetric metric) {
  if (labels.size() != x.rows()) throw LengthMismatch("evaluate_metric: length mismatch");
  if (metric == ImportanceMetric::Auc) return roc_auc(model.ranking_scores(x), labels);
  std::vector<int> predicted;
  for (double p : model.predict(x)) predicted.push_back(p >= model.threshold ? 1 : 0);
  const MetricSet m = metrics_from_confusion(confusion_from_predictions(predicted, labels), 0.5);
  return metric == ImportanceMetric::Recall ? m.recall : m.f1;
}

std::vector<double> permutation_importance(const PUModel& model, const Matrix& x,
                                           std::span<const int> labels, ImportanceMetric metric,
                                           std::size_t n_repeats, std::uint64_t seed) {
  if (n_repeats == 0) throw DataError("permutation_importance: n_repeats must be positive");
  const double baseline = evaluate_metric(model, x, labels, metric);
  std::vector<double> importance(x.cols(), 0.0);
  parallel_for(x.cols(), [&](std::size_t j) {
    Rng rng(derive_seed(seed, j));
    Matrix shuffled = x;
    std::vector<double> column = x.column(j);
    double total = 0.0;
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
      rng.shuffle(std::span<double>(column));
      shuffled.set_column(j, column);
      total += evaluate_metric(model, shuffled, labels, metric);
    }
    importance[j] = baseline - total / static_cast<double>(n_repeats);
  });
  return importance;
}

ImportanceReport aggregate_importance(std::span<const std::string> names,
                                      const std::vector<std::vector<double>>& per_fold,
                                      ImportanceMetric metric, std::size_t expected_folds) {
  if (expected_folds != 0 && per_fold.size() != expected_folds) {
    throw LengthMismatch("importance: expected " + std::to_string(expected_folds) +
                         " folds, got " + std::to_string(per_fold.size()));
  }
  for (const auto& fold : per_fold) {
    if (fold.size() != names.size()) {
      throw LengthMismatch("importance: a fold has " + std::to_string(fold.size()) +
                           " values for " + std::to_string(names.size()) + " features");
    }
  }
  ImportanceReport report;
  report.metric = metric;
  for (std::size_t j = 0; j < names.size(); ++j) {
    FeatureImportance fi;
    fi.feature = names[j];
    for (const auto& fold : per_fold) fi.per_fold.push_back(fold[j]);
    fi.median = median(fi.per_fold);
    fi.mean = mean(fi.per_fold);
    fi.std = sample_stddev(fi.per_fold);
    report.features.push_back(std::move(fi));
  }
  std::sort(report.features.begin(), report.features.end(),
            [](const FeatureImportance& a, const FeatureImportance& b) {
              if (a.median != b.median) return a.median > b.median;
              return a.feature < b.feature;
            });
  for (std::size_t k = 0; k < report.features.size(); ++k) report.features[k].rank = k + 1;
  return report;
}

ImportanceReport cv_importance(const PQNSplit& split, PUMode mode, const EvalParams& params,
                               ImportanceMetric metric, std::size_t n_repeats,
                               std::uint64_t seed) {
  const FoldAssignment folds = assign_folds(split, params.folds, seed);
  std::vector<std::vector<double>> per_fold(params.folds);
  parallel_for(params.folds, [&](std::size_t i) {
    PUParams pu = params.pu;
    pu.seed = derive_seed(seed, 1000 + i);
    const PUModel model = fit_fold_model(split, folds, i, mode, pu);
    const FoldTestSet test = fold_test_set(split, folds, i);
    per_fold[i] = permutation_importance(model, test.x, test.actual, metric, n_repeats,
                                         derive_seed(seed, 3000 + i));
  });
  return aggregate_importance(split.p.feature_names, per_fold, metric, params.folds);
}

}  // namespace ubf
