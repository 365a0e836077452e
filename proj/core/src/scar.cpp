#include "ubf/scar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ubf/error.hpp"
#include "ubf/parallel.hpp"
#include "ubf/pu.hpp"
#include "ubf/random.hpp"
#include "ubf/stats.hpp"

namespace ubf {

namespace {

constexpr std::size_t kMinSide = 20;
constexpr std::size_t kMinEstimated = 10;

// Seed streams.
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamScore = 2;
constexpr std::uint64_t kStreamPrior = 3;
constexpr std::uint64_t kStreamObserved = 4;
constexpr std::uint64_t kStreamRelabel = 1'000'000;
constexpr std::uint64_t kStreamReplicate = 2'000'000;

Matrix sorted_rows(const Matrix& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = m.row(a);
    const auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return m.select_rows(order);
}

std::vector<double> fit_and_score(const Matrix& positives, const Matrix& negatives,
                                  const Matrix& target, const ForestParams& params) {
  const Matrix x = Matrix::vstack(positives, negatives);
  std::vector<int> y(x.rows(), 0);
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(positives.rows()), 1);
  const std::vector<double> w(x.rows(), 1.0);
  return TreeEnsemble::fit(x, y, w, params).predict_proba(target);
}

// Scores every unlabeled row with a model that never saw it: U is split in
// two halves and each half is scored by a P-vs-other-half forest.
std::vector<double> cross_fit_scores(const Matrix& positives, const Matrix& unlabeled,
                                     const ScarParams& params) {
  const std::size_t n = unlabeled.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(params.seed, kStreamSplit));
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t half = n / 2;
  const std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  const Matrix ua = unlabeled.select_rows(a);
  const Matrix ub = unlabeled.select_rows(b);

  ForestParams fp = params.scorer;
  fp.seed = derive_seed(params.seed, kStreamScore);
  const auto score_b = fit_and_score(positives, ua, ub, fp);
  fp.seed = derive_seed(params.seed, kStreamScore + 100);
  const auto score_a = fit_and_score(positives, ub, ua, fp);

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < a.size(); ++i) scores[a[i]] = score_a[i];
  for (std::size_t i = 0; i < b.size(); ++i) scores[b[i]] = score_b[i];
  return scores;
}

}  // namespace

ForestParams default_discriminator_params() {
  ForestParams p;
  p.n_trees = 25;
  p.max_depth = 5;
  p.min_leaf_weight = 3.0;
  return p;
}

ForestParams default_scoring_params() {
  ForestParams p;
  p.n_trees = 50;
  p.max_depth = 8;
  p.min_leaf_weight = 2.0;
  return p;
}

double discriminator_auc(const Matrix& a, const Matrix& b, std::uint64_t seed, std::size_t folds,
                         const ForestParams& params) {
  if (a.rows() < 2 || b.rows() < 2) {
    throw TooFewSamples("discriminator needs at least 2 rows per side, got " +
                        std::to_string(a.rows()) + " and " + std::to_string(b.rows()));
  }
  if (a.cols() != b.cols()) throw FeatureMismatch("discriminator: sides differ in width");
  const std::size_t k = std::max<std::size_t>(2, std::min({folds, a.rows(), b.rows()}));

  Rng rng(seed);
  std::vector<std::size_t> order_a(a.rows());
  std::vector<std::size_t> order_b(b.rows());
  std::iota(order_a.begin(), order_a.end(), 0);
  std::iota(order_b.begin(), order_b.end(), 0);
  rng.shuffle(std::span<std::size_t>(order_a));
  rng.shuffle(std::span<std::size_t>(order_b));

  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_a, test_a, train_b, test_b;
    for (std::size_t i = 0; i < order_a.size(); ++i) {
      (i % k == fold ? test_a : train_a).push_back(order_a[i]);
    }
    for (std::size_t i = 0; i < order_b.size(); ++i) {
      (i % k == fold ? test_b : train_b).push_back(order_b[i]);
    }
    ForestParams fp = params;
    fp.seed = derive_seed(seed, fold + 1);
    const Matrix test = Matrix::vstack(a.select_rows(test_a), b.select_rows(test_b));
    const auto s = fit_and_score(a.select_rows(train_a), b.select_rows(train_b), test, fp);
    scores.insert(scores.end(), s.begin(), s.end());
    labels.insert(labels.end(), test_a.size(), 1);
    labels.insert(labels.end(), test_b.size(), 0);
  }
  return roc_auc(scores, labels);
}

ScarTestResult scar_test(const Matrix& positives_in, const Matrix& unlabeled_in,
                         const ScarParams& params) {
  if (positives_in.rows() < kMinSide || unlabeled_in.rows() < kMinSide) {
    throw TooFewSamples("SCAR test needs at least " + std::to_string(kMinSide) +
                        " labeled and unlabeled rows, got " + std::to_string(positives_in.rows()) +
                        " and " + std::to_string(unlabeled_in.rows()));
  }
  if (params.bootstrap == 0) throw DataError("SCAR test: bootstrap count must be positive");
  // Row order must not matter, so work on a canonical ordering.
  const Matrix positives = sorted_rows(positives_in);
  const Matrix unlabeled = sorted_rows(unlabeled_in);

  ScarTestResult result;
  result.bootstrap = params.bootstrap;
  result.alpha = params.alpha;
  result.n_positive = positives.rows();
  result.n_unlabeled = unlabeled.rows();

  if (params.pi_hat) {
    result.pi_hat = *params.pi_hat;
    result.pi_source = "caller";
  } else if (params.q_count) {
    result.pi_hat = static_cast<double>(*params.q_count) / static_cast<double>(unlabeled.rows());
    result.pi_source = "q_ratio";
  } else {
    PUParams pu;
    pu.forest = params.scorer;
    pu.seed = derive_seed(params.seed, kStreamPrior);
    const double c = fit_classic(positives, unlabeled, pu).c_hat;
    result.pi_hat = static_cast<double>(positives.rows()) * (1.0 - c) /
                    (c * static_cast<double>(unlabeled.rows()));
    result.pi_source = "e1";
  }
  if (!std::isfinite(result.pi_hat)) throw DataError("SCAR test: class prior is not finite");
  result.pi_hat = std::clamp(result.pi_hat, 0.0, 1.0);

  const auto scores = cross_fit_scores(positives, unlabeled, params);
  const auto n_est = static_cast<std::size_t>(
      std::ceil(result.pi_hat * static_cast<double>(unlabeled.rows()) - 1e-9));
  if (n_est < kMinEstimated) {
    throw TooFewSamples("SCAR test: only " + std::to_string(n_est) +
                        " estimated positives in U (need " + std::to_string(kMinEstimated) + ")");
  }
  std::vector<std::size_t> order(unlabeled.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  order.resize(n_est);
  std::sort(order.begin(), order.end());
  const Matrix estimated = unlabeled.select_rows(order);
  result.n_estimated_positive = n_est;
  result.c_hat_emp = static_cast<double>(positives.rows()) /
                     static_cast<double>(positives.rows() + n_est);

  result.statistic = discriminator_auc(positives, estimated, derive_seed(params.seed, kStreamObserved),
                                       params.folds, params.discriminator);

  const Matrix pool = Matrix::vstack(positives, estimated);
  result.null_distribution.assign(params.bootstrap, 0.5);
  parallel_for(params.bootstrap, [&](std::size_t r) {
    Rng rng(derive_seed(params.seed, kStreamRelabel + r));
    std::vector<std::size_t> chosen;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.rows(); ++i) {
      (rng.bernoulli(result.c_hat_emp) ? chosen : rest).push_back(i);
    }
    if (chosen.size() < 2 || rest.size() < 2) return;
    result.null_distribution[r] =
        discriminator_auc(pool.select_rows(chosen), pool.select_rows(rest),
                          derive_seed(params.seed, kStreamReplicate + r), params.folds,
                          params.discriminator);
  });

  const auto at_least = std::count_if(result.null_distribution.begin(), result.null_distribution.end(),
                                      [&](double v) { return v >= result.statistic; });
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(params.bootstrap + 1);
  result.reject = result.p_value <= params.alpha;
  result.notes = {
      "estimated positives: top ceil(pi_hat * |U|) rows of U by 2-fold cross-fitted P-vs-U scores",
      "statistic: " + std::to_string(params.folds) + "-fold cross-validated discriminator AUC",
      "null: members of P and the estimated positives relabeled with probability c_hat_emp",
      "p-value: (1 + #{null >= observed}) / (B + 1)",
  };
  return result;
}

}  // namespace ubf
