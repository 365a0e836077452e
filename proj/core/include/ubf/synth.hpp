#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ubf/feature_table.hpp"
#include "ubf/matrix.hpp"

namespace ubf {

/// Two unit-covariance Gaussian classes with means at +/- separation/2 along
/// the first axis. With labeling_bias = 0 every positive is labeled with
/// probability c_true (SCAR); a positive bias labels positives with
/// probability proportional to sigmoid(bias * (x1 - separation/2)), rescaled
/// to mean c_true.
struct GeneratorSpec {
  std::size_t n = 1000;
  double pi = 0.5;
  double c_true = 0.3;
  std::size_t dim = 2;
  double separation = 3.0;
  double labeling_bias = 0.0;
  std::uint64_t seed = 0;

  /// Throws BadSpec when a parameter is out of range.
  void validate() const;
};

struct SyntheticData {
  Matrix x;
  std::vector<int> y_true;
  std::vector<int> s;  ///< 1 = labeled
};

SyntheticData generate(const GeneratorSpec& spec);

/// Exact p(y=1 | x) for the generating mixture.
double oracle_posterior(const GeneratorSpec& spec, std::span<const double> x);

/// AUC of the oracle posterior against y: Phi(separation / sqrt(2)).
double oracle_auc(const GeneratorSpec& spec);

/// Feature names x1..xd, ids "SYN-<row>", heuristic_flag = s, plus y_true.
FeatureTable to_feature_table(const SyntheticData& data);

}  // namespace ubf
