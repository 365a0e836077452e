#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ubf/error.hpp"
#include "ubf/random.hpp"
#include "ubf/stats.hpp"
#include "ubf/synth.hpp"

namespace {

using namespace ubf;

TEST(Synth, ValidateRejectsBadSpecs) {
  GeneratorSpec s;
  EXPECT_NO_THROW(s.validate());
  for (auto mutate : std::vector<void (*)(GeneratorSpec&)>{
           [](GeneratorSpec& g) { g.pi = 0.0; }, [](GeneratorSpec& g) { g.pi = 1.0; },
           [](GeneratorSpec& g) { g.c_true = 0.0; }, [](GeneratorSpec& g) { g.c_true = 1.5; },
           [](GeneratorSpec& g) { g.dim = 0; }, [](GeneratorSpec& g) { g.n = 0; },
           [](GeneratorSpec& g) { g.separation = -1; }}) {
    GeneratorSpec g;
    mutate(g);
    EXPECT_THROW(g.validate(), BadSpec);
  }
}

TEST(Synth, OraclePosteriorAtPositiveMean) {
  GeneratorSpec s;
  s.separation = 4.0;
  s.pi = 0.5;
  const std::vector<double> x{2.0, 0.0};
  // log-odds = separation * x1 = 8
  EXPECT_NEAR(oracle_posterior(s, x), 1.0 / (1.0 + std::exp(-8.0)), 1e-12);
  const std::vector<double> mid{0.0, 5.0};
  EXPECT_NEAR(oracle_posterior(s, mid), 0.5, 1e-15);
  s.pi = 0.8;
  EXPECT_NEAR(oracle_posterior(s, mid), 0.8, 1e-12);
}

// Posterior from the two Gaussian densities written out, at random points.
TEST(Synth, OraclePosteriorMatchesDensityRatio) {
  Rng r(12);
  for (int t = 0; t < 200; ++t) {
    GeneratorSpec s;
    s.dim = 3;
    s.pi = 0.1 + 0.8 * r.uniform();
    s.separation = 5 * r.uniform();
    std::vector<double> x{3 * r.normal(), r.normal(), r.normal()};
    auto density = [&](double mu) {
      double q = (x[0] - mu) * (x[0] - mu) + x[1] * x[1] + x[2] * x[2];
      return std::exp(-0.5 * q);
    };
    const double pos = s.pi * density(s.separation / 2);
    const double neg = (1 - s.pi) * density(-s.separation / 2);
    if (pos + neg < 1e-300) continue;
    EXPECT_NEAR(oracle_posterior(s, x), pos / (pos + neg), 1e-12);
  }
  GeneratorSpec s;
  s.separation = 4.0;
  EXPECT_NEAR(oracle_posterior(s, std::vector<double>{2.0, 0.0}), 0.99966, 5e-6);
}

TEST(Synth, OracleAucAgreesWithSimulation) {
  GeneratorSpec s;
  s.separation = 1.5;
  s.n = 20000;
  s.seed = 2;
  const SyntheticData d = generate(s);
  std::vector<double> score(d.x.rows());
  for (std::size_t i = 0; i < score.size(); ++i) score[i] = d.x(i, 0);
  EXPECT_NEAR(roc_auc(score, d.y_true), oracle_auc(s), 0.01);
  EXPECT_NEAR(oracle_auc(s), 0.5 * std::erfc(-1.5 / 2.0), 1e-15);
}

TEST(Synth, ScarLabelingFrequencyAndIndependence) {
  GeneratorSpec s;
  s.n = 20000;
  s.c_true = 0.3;
  s.seed = 3;
  const SyntheticData d = generate(s);
  std::vector<double> x1, lab;
  double labeled = 0, positives = 0;
  for (std::size_t i = 0; i < d.s.size(); ++i) {
    EXPECT_LE(d.s[i], d.y_true[i]);
    if (!d.y_true[i]) continue;
    positives += 1;
    labeled += d.s[i];
    x1.push_back(d.x(i, 0));
    lab.push_back(d.s[i]);
  }
  EXPECT_NEAR(positives / s.n, 0.5, 0.015);
  EXPECT_NEAR(labeled / positives, 0.3, 0.015);
  EXPECT_NEAR(pearson(x1, lab), 0.0, 0.03);
}

TEST(Synth, BiasedLabelingFavoursHighX1) {
  GeneratorSpec s;
  s.n = 20000;
  s.labeling_bias = 3.0;
  s.seed = 4;
  const SyntheticData d = generate(s);
  std::vector<double> x1, lab;
  double labeled = 0, positives = 0;
  for (std::size_t i = 0; i < d.s.size(); ++i) {
    if (!d.y_true[i]) continue;
    positives += 1;
    labeled += d.s[i];
    x1.push_back(d.x(i, 0));
    lab.push_back(d.s[i]);
  }
  EXPECT_NEAR(labeled / positives, 0.3, 0.02);
  EXPECT_GT(pearson(x1, lab), 0.3);
}

TEST(Synth, DeterministicAndTabular) {
  GeneratorSpec s;
  s.n = 50;
  s.dim = 4;
  s.seed = 9;
  const SyntheticData a = generate(s), b = generate(s);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.s, b.s);
  const FeatureTable t = to_feature_table(a);
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"x1", "x2", "x3", "x4"}));
  EXPECT_EQ(t.issue_ids[0], "SYN-1");
  EXPECT_EQ(t.heuristic_flag, a.s);
  EXPECT_EQ(*t.y_true, a.y_true);
}

}  // namespace
