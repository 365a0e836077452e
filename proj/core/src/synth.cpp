#include "ubf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ubf/error.hpp"
#include "ubf/random.hpp"

namespace ubf {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n == 0) throw BadSpec("n must be positive");
  if (!(pi > 0.0 && pi < 1.0)) throw BadSpec("pi must lie in (0, 1)");
  if (!(c_true > 0.0 && c_true <= 1.0)) throw BadSpec("c_true must lie in (0, 1]");
  if (dim == 0) throw BadSpec("dim must be positive");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw BadSpec("separation must be finite and non-negative");
  }
  if (!(labeling_bias >= 0.0) || !std::isfinite(labeling_bias)) {
    throw BadSpec("labeling_bias must be finite and non-negative");
  }
}

SyntheticData generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticData d;
  d.x = Matrix(spec.n, spec.dim);
  d.y_true.resize(spec.n);
  d.s.assign(spec.n, 0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    d.y_true[i] = rng.bernoulli(spec.pi) ? 1 : 0;
    for (std::size_t j = 0; j < spec.dim; ++j) d.x(i, j) = rng.normal();
    d.x(i, 0) += (d.y_true[i] ? 0.5 : -0.5) * spec.separation;
  }

  // Labeling uses its own stream so that x and y do not depend on the bias.
  Rng label_rng(derive_seed(spec.seed, 1));
  if (spec.labeling_bias == 0.0) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      const bool draw = label_rng.bernoulli(spec.c_true);
      if (d.y_true[i]) d.s[i] = draw ? 1 : 0;
    }
    return d;
  }

  // Propensity proportional to sigmoid(bias * x1), with x1 measured from the
  // positive class mean, rescaled so that its mean over the generated
  // positives is c_true.
  std::vector<double> propensity(spec.n, 0.0);
  double total = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    if (!d.y_true[i]) continue;
    propensity[i] = sigmoid(spec.labeling_bias * (d.x(i, 0) - 0.5 * spec.separation));
    total += propensity[i];
    ++positives;
  }
  const double scale = total > 0.0 ? spec.c_true * static_cast<double>(positives) / total : 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool draw = label_rng.bernoulli(std::clamp(propensity[i] * scale, 0.0, 1.0));
    if (d.y_true[i]) d.s[i] = draw ? 1 : 0;
  }
  return d;
}

double oracle_posterior(const GeneratorSpec& spec, std::span<const double> x) {
  if (x.empty()) throw BadSpec("oracle_posterior: empty point");
  // log N(x; +m) - log N(x; -m) = 2 m x1 with m = separation / 2.
  const double log_odds = spec.separation * x[0] + std::log(spec.pi / (1.0 - spec.pi));
  return sigmoid(log_odds);
}

double oracle_auc(const GeneratorSpec& spec) {
  return 0.5 * std::erfc(-spec.separation / 2.0);
}

FeatureTable to_feature_table(const SyntheticData& data) {
  FeatureTable t;
  for (std::size_t j = 0; j < data.x.cols(); ++j) t.feature_names.push_back("x" + std::to_string(j + 1));
  t.x = data.x;
  t.y_true = data.y_true;
  t.heuristic_flag = data.s;
  for (std::size_t i = 0; i < data.x.rows(); ++i) {
    t.issue_ids.push_back("SYN-" + std::to_string(i + 1));
    t.event_indices.push_back(i);
  }
  return t;
}

}  // namespace ubf
