#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ubf/forest.hpp"
#include "ubf/matrix.hpp"

namespace ubf {

/// Small, fast forest used to tell two samples apart.
ForestParams default_discriminator_params();

/// Forest that scores U when picking the estimated positives.
ForestParams default_scoring_params();

struct ScarParams {
  std::size_t bootstrap = 1000;  ///< B
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Class prior of U supplied by the caller; wins over q_count.
  std::optional<double> pi_hat;
  /// Manually confirmed positives inside U; gives pi_hat = q_count / |U|.
  std::optional<std::size_t> q_count;
  std::size_t folds = 5;
  ForestParams discriminator = default_discriminator_params();
  ForestParams scorer = default_scoring_params();
};

struct ScarTestResult {
  double statistic = 0.5;  ///< discriminator AUC of P vs the estimated positives
  double p_value = 1.0;
  std::size_t bootstrap = 0;
  double pi_hat = 0.0;
  std::string pi_source;   ///< "caller", "q_ratio" or "e1"
  double c_hat_emp = 0.0;  ///< |P| / (|P| + |E|)
  std::size_t n_positive = 0;
  std::size_t n_unlabeled = 0;
  std::size_t n_estimated_positive = 0;
  std::vector<double> null_distribution;
  double alpha = 0.05;
  bool reject = false;
  /// How the test was operationalized, for the report.
  std::vector<std::string> notes;
};

/// Cross-validated AUC of a forest separating A (label 1) from B (label 0);
/// pooled out-of-fold scores. Throws TooFewSamples when either side has
/// fewer than 2 rows.
double discriminator_auc(const Matrix& a, const Matrix& b, std::uint64_t seed,
                         std::size_t folds = 5,
                         const ForestParams& params = default_discriminator_params());

/// Bootstrap test of the SCAR assumption. Throws TooFewSamples when |P| or
/// |U| is below 20 or fewer than 10 estimated positives result.
ScarTestResult scar_test(const Matrix& positives, const Matrix& unlabeled,
                         const ScarParams& params);

}  // namespace ubf
