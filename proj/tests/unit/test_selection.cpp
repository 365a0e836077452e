#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ubf/error.hpp"
#include "ubf/random.hpp"
#include "ubf/selection.hpp"

namespace {

using namespace ubf;

// Reference Spearman: ranks by counting, then the Pearson formula written out.
double spearman_reference(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx == 0 || syy == 0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

TEST(Selection, SpearmanMatchesReference) {
  Rng r(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + r.index(40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(r.index(8));
      y[i] = x[i] * (r.uniform() - 0.3) + static_cast<double>(r.index(4));
    }
    EXPECT_NEAR(spearman_rho(x, y), spearman_reference(x, y), 1e-12);
  }
}

TEST(Selection, SpearmanEdgeCases) {
  const std::vector<double> x{1, 2, 3}, k{4, 4, 4}, shorter{1, 2};
  EXPECT_EQ(spearman_rho(x, k), 0.0);
  EXPECT_THROW(spearman_rho(x, shorter), LengthMismatch);
  const std::vector<double> sq{1, 8, 27};
  EXPECT_NEAR(spearman_rho(x, sq), 1.0, 1e-15);
}

TEST(Selection, MatrixIsSymmetricWithUnitDiagonal) {
  Rng r(2);
  Matrix x(30, 4);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = r.normal();
  const Matrix m = spearman_matrix(x);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(m(i, i), 1.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), m(j, i));
  }
}

TEST(Selection, SingleLinkageByHand) {
  // d(0,1) = 0.1, d(1,2) = 0.3, d(0,2) = 0.5
  const Matrix d = Matrix::from_rows({{0, 0.1, 0.5}, {0.1, 0, 0.3}, {0.5, 0.3, 0}});
  const auto steps = single_linkage(d);
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].left, 0u);
  EXPECT_EQ(steps[0].right, 1u);
  EXPECT_EQ(steps[0].distance, 0.1);
  EXPECT_EQ(steps[0].size, 2u);
  EXPECT_EQ(steps[1].left, 2u);
  EXPECT_EQ(steps[1].right, 3u);
  EXPECT_EQ(steps[1].distance, 0.3);
  EXPECT_EQ(steps[1].size, 3u);
}

struct Planted {
  Matrix x;
  std::vector<std::string> names;
};

// a, b = a + small noise (|rho| high), c independent, d constant.
Planted planted() {
  Rng r(8);
  Planted p;
  p.names = {"a", "b", "c", "d"};
  p.x = Matrix(200, 4);
  for (std::size_t i = 0; i < 200; ++i) {
    const double a = r.normal();
    p.x(i, 0) = a;
    p.x(i, 1) = a + 0.1 * r.normal();
    p.x(i, 2) = r.normal();
    p.x(i, 3) = 1.0;
  }
  return p;
}

TEST(Selection, CorrelationFilterKeepsPreferred) {
  const Planted p = planted();
  const std::vector<std::string> prefer{"b"};
  const SelectionReport rep = correlation_filter(p.x, p.names, 0.7, prefer);
  EXPECT_EQ(rep.retained, (std::vector<std::string>{"b", "c"}));
  ASSERT_EQ(rep.removed.size(), 2u);
  bool saw_constant = false, saw_a = false;
  for (const auto& r : rep.removed) {
    if (r.feature == "d") saw_constant = r.kept == "constant";
    if (r.feature == "a") {
      saw_a = r.kept == "b" && r.describe() == "correlated_with(b)";
      EXPECT_GE(r.value, 0.7);
    }
  }
  EXPECT_TRUE(saw_constant);
  EXPECT_TRUE(saw_a);
}

TEST(Selection, RedundancyRemovesLinearCombination) {
  Rng r(4);
  Matrix x(300, 4);
  for (std::size_t i = 0; i < 300; ++i) {
    x(i, 0) = r.normal();
    x(i, 1) = r.normal();
    x(i, 2) = r.normal();
    x(i, 3) = x(i, 0) + x(i, 1) + x(i, 2);
  }
  const std::vector<std::string> names{"p", "q", "r", "sum"};
  const SelectionReport rep = select_features(x, names, 0.99, 0.9);
  ASSERT_EQ(rep.removed.size(), 1u);
  EXPECT_EQ(rep.removed[0].reason, RemovedFeature::Reason::Redundant);
  EXPECT_GT(rep.removed[0].value, 0.9);
  EXPECT_EQ(rep.retained.size(), 3u);
}

TEST(Selection, IsAFixpoint) {
  const Planted p = planted();
  const SelectionReport first = select_features(p.x, p.names);
  std::vector<std::size_t> idx;
  for (const auto& name : first.retained) {
    idx.push_back(static_cast<std::size_t>(std::find(p.names.begin(), p.names.end(), name) - p.names.begin()));
  }
  const SelectionReport second = select_features(p.x.select_columns(idx), first.retained);
  EXPECT_EQ(second.retained, first.retained);
  EXPECT_TRUE(second.removed.empty());
}

TEST(Selection, PreferenceOrderPutsListedFirst) {
  const Planted p = planted();
  const std::vector<std::string> prefer{"c"};
  const auto order = preference_order(p.x, p.names, prefer);
  ASSERT_EQ(order.size(), 4u);
  EXPECT_EQ(order[0], "c");
}

TEST(Selection, DendrogramMentionsEveryFeature) {
  const Planted p = planted();
  const std::string text = render_dendrogram(select_features(p.x, p.names));
  for (const auto& n : p.names) EXPECT_NE(text.find(n), std::string::npos);
}

}  // namespace
