#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubf/forest.hpp"
#include "ubf/matrix.hpp"

namespace ubf {

enum class PUMode { Classic, Weighted };

std::string_view to_string(PUMode mode);
std::optional<PUMode> parse_pu_mode(std::string_view text);

enum class Verdict { Unrelated, NotFlagged };

std::string_view to_string(Verdict v);

inline constexpr double kMinLabelFrequency = 1e-3;
inline constexpr double kDegenerateG = 1.0 - 1e-9;

struct PUParams {
  ForestParams forest;
  double holdout_fraction = 0.2;  ///< share of P (and of U) held out to estimate c
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

/// A fitted Elkan-Noto model. Classic predicts min(1, g(x)/c_hat) from the
/// nontraditional classifier g; Weighted predicts with a second forest
/// trained on the weighted expansion of U.
class PUModel {
 public:
  PUMode mode = PUMode::Classic;
  TreeEnsemble base;                  ///< g(x) ~ p(s=1 | x)
  std::optional<TreeEnsemble> second;  ///< Weighted only
  double c_hat = 1.0;
  double threshold = 0.5;
  std::vector<std::string> features;  ///< column names the model was fit on

  double predict(std::span<const double> row) const;
  std::vector<double> predict(const Matrix& x) const;

  /// Score for ranking metrics. Equals predict() for Weighted; for Classic
  /// it is g(x) itself, which orders rows like f(x) without the ties that
  /// the clip at 1 introduces.
  std::vector<double> ranking_scores(const Matrix& x) const;

  Verdict classify(std::span<const double> row) const;

  nlohmann::json to_json() const;
  static PUModel from_json(const nlohmann::json& j);
};

/// Mean g over held-out positives, clipped to [1e-3, 1]. Throws EmptyHoldout.
double estimate_c(const TreeEnsemble& base, const Matrix& holdout_positives);

double predict_classic(double g, double c_hat);

/// ((1 - c) / c) * (g / (1 - g)) clipped to [0, 1]. Throws DegenerateG when
/// g >= 1 - 1e-9.
double compute_weight(double g, double c_hat);

/// Trains g on P-train (label 1) vs U-train (label 0) and estimates c_hat on
/// the held-out share of P. The same share of U is held out and not used.
/// Throws InsufficientPositives when |P| < 10 or
/// |U| < 10.
PUModel fit_classic(const Matrix& positives, const Matrix& unlabeled, const PUParams& params);

/// Classic stage, then a fresh forest on P (label 1, weight 1) plus every
/// unlabeled row twice: label 1 with weight w(u), label 0 with 1 - w(u).
/// w(u) uses the out-of-bag g of u so that g is not scored in-sample.
PUModel fit_weighted(const Matrix& positives, const Matrix& unlabeled, const PUParams& params);

PUModel fit_pu(PUMode mode, const Matrix& positives, const Matrix& unlabeled,
               const PUParams& params);

}  // namespace ubf
