#pragma once

#include <span>
#include <vector>

namespace ubf {

double mean(std::span<const double> values);

/// Median; the mean of the two middle values for even counts. Empty -> 0.
double median(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_stddev(std::span<const double> values);

/// 1-based ranks with ties assigned their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Area under the ROC curve as the Mann-Whitney statistic, ties counted as
/// one half. Returns 0.5 when either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace ubf
