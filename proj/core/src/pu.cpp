#include "ubf/pu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ubf/error.hpp"
#include "ubf/random.hpp"

namespace ubf {

namespace {

constexpr std::size_t kMinRows = 10;

// Row indices of `m` in lexicographic row order, so that the holdout draw
// does not depend on how the caller ordered P.
std::vector<std::size_t> sorted_row_order(const Matrix& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = m.row(a);
    const auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return order;
}

void check_sizes(const Matrix& positives, const Matrix& unlabeled) {
  if (positives.rows() < kMinRows) {
    throw InsufficientPositives("PU fit needs at least " + std::to_string(kMinRows) +
                                " labeled positives, got " + std::to_string(positives.rows()));
  }
  if (unlabeled.rows() < kMinRows) {
    throw InsufficientPositives("PU fit needs at least " + std::to_string(kMinRows) +
                                " unlabeled rows, got " + std::to_string(unlabeled.rows()));
  }
  if (positives.cols() != unlabeled.cols()) {
    throw FeatureMismatch("P and U have different feature counts");
  }
}

// Fits g and c_hat. When `oob_unlabeled` is given it receives g for every
// unlabeled row, out-of-bag for the rows g was trained on.
PUModel classic_stage(const Matrix& positives, const Matrix& unlabeled, const PUParams& params,
                      std::vector<double>* oob_unlabeled) {
  check_sizes(positives, unlabeled);
  if (!(params.holdout_fraction > 0.0 && params.holdout_fraction < 1.0)) {
    throw DataError("holdout_fraction must lie in (0, 1)");
  }

  // The same share of U is set aside so that the training set keeps the
  // labeled fraction of the data; otherwise g would be calibrated to a
  // smaller c than the one estimated on the holdout.
  Rng rng(derive_seed(params.seed, 0));
  auto split = [&](const Matrix& m) {
    std::vector<std::size_t> order = sorted_row_order(m);
    rng.shuffle(std::span<std::size_t>(order));
    const auto n_hold = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(params.holdout_fraction * static_cast<double>(m.rows()))),
        1, m.rows() - 1);
    return std::pair{std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold)),
                     std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end())};
  };
  const auto [hold, train] = split(positives);
  const auto [u_hold, u_train] = split(unlabeled);

  const Matrix x = Matrix::vstack(positives.select_rows(train), unlabeled.select_rows(u_train));
  std::vector<int> y(x.rows(), 0);
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(train.size()), 1);
  const std::vector<double> w(x.rows(), 1.0);

  ForestParams fp = params.forest;
  fp.seed = derive_seed(params.seed, 1);

  PUModel model;
  model.mode = PUMode::Classic;
  model.threshold = params.threshold;
  if (oob_unlabeled) {
    std::vector<double> oob;
    model.base = TreeEnsemble::fit_with_oob(x, y, w, fp, oob);
    oob_unlabeled->assign(unlabeled.rows(), 0.0);
    for (std::size_t k = 0; k < u_train.size(); ++k) (*oob_unlabeled)[u_train[k]] = oob[train.size() + k];
    for (std::size_t i : u_hold) (*oob_unlabeled)[i] = model.base.predict_proba(unlabeled.row(i));
  } else {
    model.base = TreeEnsemble::fit(x, y, w, fp);
  }
  model.c_hat = estimate_c(model.base, positives.select_rows(hold));
  return model;
}

}  // namespace

std::string_view to_string(PUMode mode) {
  return mode == PUMode::Classic ? "classic" : "weighted";
}

std::optional<PUMode> parse_pu_mode(std::string_view text) {
  if (text == "classic") return PUMode::Classic;
  if (text == "weighted") return PUMode::Weighted;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  return v == Verdict::Unrelated ? "Unrelated" : "NotFlagged";
}

double PUModel::predict(std::span<const double> row) const {
  if (mode == PUMode::Weighted) {
    if (!second) throw InternalError("weighted PU model without a second stage");
    return second->predict_proba(row);
  }
  return predict_classic(base.predict_proba(row), c_hat);
}

std::vector<double> PUModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

std::vector<double> PUModel::ranking_scores(const Matrix& x) const {
  if (mode == PUMode::Classic) return base.predict_proba(x);
  return predict(x);
}

Verdict PUModel::classify(std::span<const double> row) const {
  return predict(row) >= threshold ? Verdict::Unrelated : Verdict::NotFlagged;
}

nlohmann::json PUModel::to_json() const {
  nlohmann::json j;
  j["format"] = "ubf-pu-model";
  j["version"] = 1;
  j["mode"] = std::string(to_string(mode));
  j["c_hat"] = c_hat;
  j["threshold"] = threshold;
  j["retained_features"] = features;
  j["base"] = base.to_json();
  if (second) j["second"] = second->to_json();
  return j;
}

PUModel PUModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ubf-pu-model") throw ParseError("not a PU model");
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported PU model version");
    PUModel m;
    const auto mode = parse_pu_mode(j.at("mode").get<std::string>());
    if (!mode) throw ParseError("PU model: unknown mode");
    m.mode = *mode;
    m.c_hat = j.at("c_hat").get<double>();
    m.threshold = j.at("threshold").get<double>();
    m.features = j.at("retained_features").get<std::vector<std::string>>();
    m.base = TreeEnsemble::from_json(j.at("base"));
    if (j.contains("second")) m.second = TreeEnsemble::from_json(j.at("second"));
    if (m.mode == PUMode::Weighted && !m.second) throw ParseError("weighted model lacks stage 2");
    if (!(m.c_hat > 0.0 && m.c_hat <= 1.0)) throw ParseError("PU model: c_hat outside (0, 1]");
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) {
      throw ParseError("PU model: threshold outside (0, 1)");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("PU model: ") + e.what());
  }
}

double estimate_c(const TreeEnsemble& base, const Matrix& holdout_positives) {
  if (holdout_positives.rows() == 0) throw EmptyHoldout("no held-out positives to estimate c");
  const auto g = base.predict_proba(holdout_positives);
  const double c = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
  return std::clamp(c, kMinLabelFrequency, 1.0);
}

double predict_classic(double g, double c_hat) { return std::min(1.0, g / c_hat); }

double compute_weight(double g, double c_hat) {
  if (g >= kDegenerateG) throw DegenerateG("g(x) = " + std::to_string(g) + " is numerically 1");
  const double w = ((1.0 - c_hat) / c_hat) * (g / (1.0 - g));
  return std::clamp(w, 0.0, 1.0);
}

PUModel fit_classic(const Matrix& positives, const Matrix& unlabeled, const PUParams& params) {
  return classic_stage(positives, unlabeled, params, nullptr);
}

PUModel fit_weighted(const Matrix& positives, const Matrix& unlabeled, const PUParams& params) {
  std::vector<double> g_unlabeled;
  PUModel model = classic_stage(positives, unlabeled, params, &g_unlabeled);
  model.mode = PUMode::Weighted;

  const std::size_t n_pos = positives.rows();
  const std::size_t n_unl = unlabeled.rows();
  Matrix x = Matrix::vstack(positives, Matrix::vstack(unlabeled, unlabeled));
  std::vector<int> y(x.rows(), 1);
  std::vector<double> w(x.rows(), 1.0);
  for (std::size_t i = 0; i < n_unl; ++i) {
    // g at (numerically) 1 means u is indistinguishable from a labeled
    // positive, so it is counted fully as a positive.
    const double g = g_unlabeled[i];
    const double wu = g >= kDegenerateG ? 1.0 : compute_weight(g, model.c_hat);
    w[n_pos + i] = wu;
    y[n_pos + n_unl + i] = 0;
    w[n_pos + n_unl + i] = 1.0 - wu;
  }

  ForestParams fp = params.forest;
  fp.seed = derive_seed(params.seed, 2);
  model.second = TreeEnsemble::fit(x, y, w, fp);
  return model;
}

PUModel fit_pu(PUMode mode, const Matrix& positives, const Matrix& unlabeled,
               const PUParams& params) {
  return mode == PUMode::Classic ? fit_classic(positives, unlabeled, params)
                                 : fit_weighted(positives, unlabeled, params);
}

}  // namespace ubf
