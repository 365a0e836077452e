#include "ubf/selection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "ubf/error.hpp"
#include "ubf/parallel.hpp"
#include "ubf/stats.hpp"

namespace ubf {

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// 0 = boolean, 1 = count, 2 = anything else
int value_kind(std::span<const double> v) {
  const bool boolean = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || x == 1.0; });
  if (boolean) return 0;
  const bool count = std::all_of(v.begin(), v.end(), [](double x) {
    return x >= 0.0 && std::floor(x) == x;
  });
  return count ? 1 : 2;
}

std::vector<std::string> resolve_priority(std::span<const std::string> priority) {
  if (!priority.empty()) return {priority.begin(), priority.end()};
  return default_selection_priority();
}

// Position of every name in preference order (0 = most preferred).
std::map<std::string, std::size_t> preference_rank(const Matrix& x,
                                                   std::span<const std::string> names,
                                                   std::span<const std::string> priority) {
  const auto order = preference_order(x, names, priority);
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  return rank;
}

std::vector<double> standardize(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sd > 0 ? (v[i] - m) / sd : 0.0;
  return out;
}

// R^2 of regressing column `target` on the other columns of `z`
// (standardized, so no intercept is needed).
double regression_r2(const Eigen::MatrixXd& z, Eigen::Index target) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  Eigen::MatrixXd design(n, p - 1);
  for (Eigen::Index j = 0, k = 0; j < p; ++j) {
    if (j != target) design.col(k++) = z.col(j);
  }
  const Eigen::VectorXd y = z.col(target);
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  const double ss_res = (y - design * beta).squaredNorm();
  const double ss_tot = y.squaredNorm();
  if (ss_tot <= 0.0) return 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("spearman_rho: length mismatch");
  if (x.size() < 2) throw LengthMismatch("spearman_rho: need at least 2 values");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Matrix spearman_matrix(const Matrix& x) {
  const std::size_t p = x.cols();
  std::vector<std::vector<double>> ranks(p);
  for (std::size_t j = 0; j < p; ++j) ranks[j] = average_ranks(x.column(j));
  Matrix rho(p, p, 0.0);
  parallel_for(p, [&](std::size_t i) {
    rho(i, i) = 1.0;
    for (std::size_t j = i + 1; j < p; ++j) rho(i, j) = pearson(ranks[i], ranks[j]);
  });
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) rho(j, i) = rho(i, j);
  }
  return rho;
}

std::string RemovedFeature::describe() const {
  if (reason == Reason::CorrelatedWith) return "correlated_with(" + kept + ")";
  return "redundant(" + format_fixed(value, 4) + ")";
}

std::vector<std::string> default_selection_priority() {
  return {"num_similar_failures",  "is_shared_same_emsg",   "modified_source_files",
          "source_lines_modified", "source_lines_added",    "source_lines_deleted",
          "has_source_code",       "config_lines_modified", "config_lines_added",
          "config_lines_deleted",  "has_config_files"};
}

std::vector<std::string> preference_order(const Matrix& x, std::span<const std::string> names,
                                          std::span<const std::string> priority) {
  const auto listed = resolve_priority(priority);
  struct Key {
    std::size_t listed;
    int kind;
    std::string name;
  };
  std::vector<Key> keys;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto it = std::find(listed.begin(), listed.end(), names[j]);
    const std::size_t pos = it == listed.end() ? listed.size()
                                               : static_cast<std::size_t>(it - listed.begin());
    keys.push_back({pos, value_kind(x.column(j)), names[j]});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.listed, a.kind, a.name) < std::tie(b.listed, b.kind, b.name);
  });
  std::vector<std::string> out;
  for (auto& k : keys) out.push_back(std::move(k.name));
  return out;
}

std::vector<LinkageStep> single_linkage(const Matrix& distance) {
  const std::size_t n = distance.rows();
  std::vector<LinkageStep> steps;
  if (n < 2) return steps;
  // Active clusters: id -> member leaves.
  std::map<std::size_t, std::vector<std::size_t>> active;
  for (std::size_t i = 0; i < n; ++i) active[i] = {i};
  std::size_t next_id = n;
  while (active.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    for (auto a = active.begin(); a != active.end(); ++a) {
      for (auto b = std::next(a); b != active.end(); ++b) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i : a->second) {
          for (std::size_t j : b->second) d = std::min(d, distance(i, j));
        }
        if (d < best) {
          best = d;
          best_a = a->first;
          best_b = b->first;
        }
      }
    }
    auto members = active[best_a];
    const auto& other = active[best_b];
    members.insert(members.end(), other.begin(), other.end());
    steps.push_back({best_a, best_b, best, members.size()});
    active.erase(best_a);
    active.erase(best_b);
    active[next_id++] = std::move(members);
  }
  return steps;
}

SelectionReport correlation_filter(const Matrix& x, std::span<const std::string> names,
                                   double threshold, std::span<const std::string> priority) {
  const std::size_t p = x.cols();
  if (names.size() != p) throw LengthMismatch("correlation_filter: names do not match columns");
  if (x.rows() < 2) throw LengthMismatch("correlation_filter: need at least 2 rows");

  SelectionReport report;
  report.features.assign(names.begin(), names.end());
  report.rho = spearman_matrix(x);

  Matrix distance(p, p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) distance(i, j) = i == j ? 0.0 : 1.0 - std::abs(report.rho(i, j));
  }
  report.linkage = single_linkage(distance);

  const auto rank = preference_rank(x, names, priority);
  std::vector<bool> removed(p, false);

  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < p; ++j) {
    if (is_constant(x.column(j))) {
      removed[j] = true;
      report.removed.push_back({names[j], RemovedFeature::Reason::CorrelatedWith, "constant", 0.0});
    } else {
      live.push_back(j);
    }
  }

  auto correlated = [&](std::size_t a, std::size_t b) {
    return std::abs(report.rho(a, b)) >= threshold;
  };
  auto by_preference = [&](std::size_t a, std::size_t b) { return rank.at(names[a]) < rank.at(names[b]); };

  // Connected components of the |rho| >= threshold graph are exactly the
  // single-linkage clusters cut at distance 1 - threshold.
  std::function<void(std::vector<std::size_t>)> resolve = [&](std::vector<std::size_t> members) {
    std::vector<bool> seen(members.size(), false);
    for (std::size_t start = 0; start < members.size(); ++start) {
      if (seen[start]) continue;
      std::vector<std::size_t> component{members[start]};
      seen[start] = true;
      for (std::size_t k = 0; k < component.size(); ++k) {
        for (std::size_t m = 0; m < members.size(); ++m) {
          if (!seen[m] && correlated(component[k], members[m])) {
            seen[m] = true;
            component.push_back(members[m]);
          }
        }
      }
      if (component.size() == 1) continue;
      std::sort(component.begin(), component.end(), by_preference);
      const std::size_t keep = component.front();
      std::vector<std::size_t> rest;
      for (std::size_t k = 1; k < component.size(); ++k) {
        const std::size_t f = component[k];
        if (correlated(f, keep)) {
          removed[f] = true;
          report.removed.push_back({names[f], RemovedFeature::Reason::CorrelatedWith, names[keep],
                                    std::abs(report.rho(f, keep))});
        } else {
          rest.push_back(f);
        }
      }
      if (!rest.empty()) resolve(std::move(rest));
    }
  };
  resolve(live);

  for (std::size_t j = 0; j < p; ++j) {
    if (!removed[j]) report.retained.push_back(names[j]);
  }
  return report;
}

SelectionReport redundancy_filter(const Matrix& x, SelectionReport report, double r2_threshold,
                                  std::span<const std::string> priority) {
  if (report.features.size() != x.cols()) {
    throw LengthMismatch("redundancy_filter: report does not describe the matrix");
  }
  const auto rank = preference_rank(x, report.features, priority);
  const std::size_t n = x.rows();

  std::map<std::string, std::vector<double>> standardized;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    standardized[report.features[j]] = standardize(x.column(j));
  }

  std::vector<std::string> current = report.retained;
  while (current.size() >= 2) {
    const std::size_t p = current.size();
    std::vector<double> r2(p, 0.0);
    bool use_pairwise = n <= p;  // n rows must exceed p-1 predictors plus one
    if (!use_pairwise) {
      Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
      for (std::size_t j = 0; j < p; ++j) {
        const auto& col = standardized.at(current[j]);
        for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
      }
      for (std::size_t j = 0; j < p; ++j) r2[j] = regression_r2(z, static_cast<Eigen::Index>(j));
      use_pairwise = std::any_of(r2.begin(), r2.end(), [](double v) { return !std::isfinite(v); });
    }
    if (use_pairwise) {
      for (std::size_t a = 0; a < p; ++a) {
        r2[a] = 0.0;
        for (std::size_t b = 0; b < p; ++b) {
          if (a == b) continue;
          const double r = pearson(standardized.at(current[a]), standardized.at(current[b]));
          r2[a] = std::max(r2[a], r * r);
        }
      }
    }

    const double top = *std::max_element(r2.begin(), r2.end());
    if (!(top > r2_threshold)) break;
    // Among near-ties, drop the least preferred feature.
    std::size_t victim = p;
    for (std::size_t j = 0; j < p; ++j) {
      if (top - r2[j] > 1e-9) continue;
      if (victim == p || rank.at(current[j]) > rank.at(current[victim])) victim = j;
    }
    report.removed.push_back(
        {current[victim], RemovedFeature::Reason::Redundant, "", r2[victim]});
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(victim));
  }

  std::vector<std::string> retained;
  for (const auto& f : report.features) {
    if (std::find(current.begin(), current.end(), f) != current.end()) retained.push_back(f);
  }
  report.retained = std::move(retained);
  return report;
}

SelectionReport select_features(const Matrix& x, std::span<const std::string> names,
                                double rho_threshold, double r2_threshold,
                                std::span<const std::string> priority) {
  return redundancy_filter(x, correlation_filter(x, names, rho_threshold, priority), r2_threshold,
                           priority);
}

std::string render_dendrogram(const SelectionReport& report) {
  const std::size_t n = report.features.size();
  if (n == 0) return "";
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> children;
  std::map<std::size_t, double> height;
  for (std::size_t k = 0; k < report.linkage.size(); ++k) {
    children[n + k] = {report.linkage[k].left, report.linkage[k].right};
    height[n + k] = report.linkage[k].distance;
  }
  std::string out;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t id, std::size_t depth) {
    out.append(depth * 2, ' ');
    if (id < n) {
      out += report.features[id] + "\n";
      return;
    }
    const double d = height[id];
    out += "+ d=" + format_fixed(d, 3) + " |rho|=" + format_fixed(1.0 - d, 3) + "\n";
    walk(children[id].first, depth + 1);
    walk(children[id].second, depth + 1);
  };
  walk(report.linkage.empty() ? 0 : n + report.linkage.size() - 1, 0);
  return out;
}

}  // namespace ubf
