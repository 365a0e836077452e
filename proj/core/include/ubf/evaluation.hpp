#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/feature_table.hpp"
#include "ubf/pu.hpp"

namespace ubf {

enum class ModelKind { Classic, Weighted, Random, ConstantPositive, Hpem };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

/// One row of a manual labels file: `issue_id,event_index,label` with label
/// P (confirmed positive, part of P), Q (confirmed positive inside the
/// evaluation sample) or N (evaluation sample, not confirmed).
struct ManualLabel {
  std::string issue_id;
  std::size_t event_index = 0;
  char label = 'N';
};

std::vector<ManualLabel> read_manual_labels(std::string_view csv_text);
std::vector<ManualLabel> load_manual_labels(const std::filesystem::path& path);

/// P: labeled positives. Q: confirmed positives hidden in the unlabeled
/// pool. N: the rest of the pool, treated as negative when scoring.
struct PQNSplit {
  FeatureTable p;
  FeatureTable q;
  FeatureTable n;
  std::string provenance;

  std::size_t size_p() const noexcept { return p.rows(); }
  std::size_t size_q() const noexcept { return q.rows(); }
  std::size_t size_n() const noexcept { return n.rows(); }
};

/// P = rows labeled P (or, when the file has no P rows, the heuristically
/// flagged rows). U = rows labeled Q or N when any are present, otherwise
/// every row outside P. Q = U rows labeled Q; N = U \ Q.
/// Throws OverlapError when a row would be in both P and U or carries two
/// labels, and DataError for labels that match no row.
PQNSplit build_pqn(const FeatureTable& table, std::span<const ManualLabel> labels);

/// For generated data: P = labeled rows, Q = unlabeled true positives,
/// N = unlabeled true negatives. Needs a y_true column.
PQNSplit build_pqn_from_truth(const FeatureTable& table);

struct CombinedConfusion {
  std::size_t a = 0;     ///< true positives
  std::size_t b = 0;     ///< false negatives
  std::size_t c_fp = 0;  ///< false positives
  std::size_t d = 0;     ///< true negatives

  CombinedConfusion& operator+=(const CombinedConfusion& o);
  friend bool operator==(const CombinedConfusion&, const CombinedConfusion&) = default;
};

struct MetricSet {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.5;
};

/// Precision, recall and F1 of a confusion matrix (0 on empty denominators).
MetricSet metrics_from_confusion(const CombinedConfusion& m, double auc);

CombinedConfusion confusion_from_predictions(std::span<const int> predicted,
                                             std::span<const int> actual);

struct EvalParams {
  PUParams pu;
  std::size_t folds = 10;
};

/// Fold membership of every P, Q and N row.
struct FoldAssignment {
  std::vector<std::size_t> p, q, n;
};

/// Shuffles each of P, Q, N with `seed` and deals them round-robin into
/// `folds` subsets. Throws FoldTooSmall when P or N has fewer rows than
/// folds, or Q is non-empty and has fewer.
FoldAssignment assign_folds(const PQNSplit& split, std::size_t folds, std::uint64_t seed);

/// Trains on the non-held-out P and U of one fold.
PUModel fit_fold_model(const PQNSplit& split, const FoldAssignment& folds, std::size_t fold,
                       PUMode mode, const PUParams& params);

/// Held-out rows of one fold: P_i and Q_i (actual positive), then N_i.
struct FoldTestSet {
  Matrix x;
  std::vector<int> actual;
  std::vector<int> hpem;  ///< empty when the split carries no HPEM column
};

FoldTestSet fold_test_set(const PQNSplit& split, const FoldAssignment& folds, std::size_t fold);

struct CvResult {
  CombinedConfusion combined;
  std::vector<CombinedConfusion> per_fold;
  MetricSet metrics;
  std::vector<double> scores;  ///< pooled out-of-fold scores
  std::vector<int> actual;
};

CvResult run_cv(const PQNSplit& split, ModelKind kind, const EvalParams& params,
                std::uint64_t seed);

CvResult baseline_random(const PQNSplit& split, std::size_t folds, std::uint64_t seed);
CvResult baseline_constant_positive(const PQNSplit& split, std::size_t folds);
/// Throws MissingEventLinkage when the split has no HPEM column.
CvResult baseline_hpem(const PQNSplit& split, std::size_t folds);

struct MetricSummary {
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

struct RunSummary {
  std::vector<MetricSet> runs;
  MetricSummary precision, recall, f1, auc;
};

RunSummary summarize_runs(std::vector<MetricSet> runs);

/// n_runs cross-validations with seeds derived from master_seed.
RunSummary repeat_runs(const PQNSplit& split, ModelKind kind, const EvalParams& params,
                       std::size_t n_runs, std::uint64_t master_seed);

struct ProjectData {
  std::string name;
  PQNSplit split;
};

struct CrossProjectRow {
  std::string project;
  RunSummary summary;
};

/// Leave-one-project-out: train on the P and U of all other projects and
/// evaluate on the held-out project's P, Q (positive) and N (negative).
/// Needs at least 2 projects with identical feature columns
/// (FeatureSchemaMismatch otherwise).
std::vector<CrossProjectRow> cross_project_validate(std::span<const ProjectData> projects,
                                                    ModelKind kind, const EvalParams& params,
                                                    std::size_t n_runs, std::uint64_t seed);

/// Restricts every project to the features all of them share, in the order
/// of the first project.
std::vector<ProjectData> align_to_common_features(std::span<const ProjectData> projects);

}  // namespace ubf
