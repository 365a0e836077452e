#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ubf/matrix.hpp"

namespace ubf {

/// Spearman correlation with average ranks for ties. 0 when either input is
/// constant. Throws LengthMismatch on unequal lengths or fewer than 2 values.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// Symmetric matrix of pairwise Spearman coefficients, unit diagonal.
Matrix spearman_matrix(const Matrix& x);

struct RemovedFeature {
  enum class Reason { CorrelatedWith, Redundant };

  std::string feature;
  Reason reason = Reason::CorrelatedWith;
  std::string kept;    ///< retained partner, or "constant"
  double value = 0.0;  ///< |rho| with the partner, or R^2

  /// "correlated_with(<kept>)" or "redundant(<R^2>)".
  std::string describe() const;
};

/// One step of single-linkage agglomeration, scipy-style: ids below the
/// leaf count are leaves, larger ids refer to earlier merges.
struct LinkageStep {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;  ///< 1 - |rho|
  std::size_t size = 0;
};

struct SelectionReport {
  std::vector<std::string> features;  ///< input order
  std::vector<std::string> retained;  ///< input order
  std::vector<RemovedFeature> removed;
  Matrix rho;
  std::vector<LinkageStep> linkage;  ///< over all input features
};

/// Preference for survivors. Listed names come first in list order; the
/// rest are ordered booleans, then counts, then continuous values, then by
/// name.
std::vector<std::string> default_selection_priority();

/// Input features sorted from most to least preferred.
std::vector<std::string> preference_order(const Matrix& x, std::span<const std::string> names,
                                          std::span<const std::string> priority);

std::vector<LinkageStep> single_linkage(const Matrix& distance);

/// Drops constant columns, then within every group of features connected
/// by |rho| >= threshold keeps the most preferred feature and removes the
/// ones correlated with it, repeating on whatever is left in the group.
SelectionReport correlation_filter(const Matrix& x, std::span<const std::string> names,
                                   double threshold = 0.7,
                                   std::span<const std::string> priority = {});

/// Repeatedly regresses each retained feature on the other retained ones
/// (standardized least squares) and removes the feature with the largest
/// R^2 while it exceeds the threshold. Near-ties go against the least
/// preferred feature. Falls back to pairwise r^2 when the design has too
/// few rows.
SelectionReport redundancy_filter(const Matrix& x, SelectionReport report,
                                  double r2_threshold = 0.9,
                                  std::span<const std::string> priority = {});

SelectionReport select_features(const Matrix& x, std::span<const std::string> names,
                                 double rho_threshold = 0.7, double r2_threshold = 0.9,
                                 std::span<const std::string> priority = {});

/// Indented text rendering of the linkage tree.
std::string render_dendrogram(const SelectionReport& report);

}  // namespace ubf
