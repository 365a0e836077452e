#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/evaluation.hpp"
#include "ubf/pu.hpp"

namespace ubf {

enum class ImportanceMetric { Recall, F1, Auc };

std::string_view to_string(ImportanceMetric m);
std::optional<ImportanceMetric> parse_importance_metric(std::string_view text);

/// The metric of `model` on labelled rows, at the model's threshold.
double evaluate_metric(const PUModel& model, const Matrix& x, std::span<const int> labels,
                       ImportanceMetric metric);

/// Per feature: baseline metric minus the mean metric over n_repeats
/// shuffles of that column alone. Negative values are kept.
std::vector<double> permutation_importance(const PUModel& model, const Matrix& x,
                                           std::span<const int> labels, ImportanceMetric metric,
                                           std::size_t n_repeats, std::uint64_t seed);

struct FeatureImportance {
  std::string feature;
  std::vector<double> per_fold;
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t rank = 0;  ///< 1 = highest median
};

struct ImportanceReport {
  ImportanceMetric metric = ImportanceMetric::F1;
  std::vector<FeatureImportance> features;  ///< sorted by rank
};

/// per_fold[f][j] is the importance of feature j in fold f. Ranks by median,
/// descending, with names breaking ties. Throws LengthMismatch when a fold
/// does not cover every feature or the fold count differs from
/// expected_folds (when non-zero).
ImportanceReport aggregate_importance(std::span<const std::string> names,
                                      const std::vector<std::vector<double>>& per_fold,
                                      ImportanceMetric metric, std::size_t expected_folds = 0);

/// Fits one model per cross-validation fold and measures permutation
/// importance on that fold's held-out rows.
ImportanceReport cv_importance(const PQNSplit& split, PUMode mode, const EvalParams& params,
                               ImportanceMetric metric, std::size_t n_repeats,
                               std::uint64_t seed);

}  // namespace ubf
