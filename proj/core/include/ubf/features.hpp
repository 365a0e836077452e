#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/ci_events.hpp"
#include "ubf/corpus.hpp"
#include "ubf/heuristics.hpp"

namespace ubf {

inline constexpr std::size_t kFeatureCount = 33;

/// Column names in the fixed output order: issue level, comment level, push level.
const std::array<std::string_view, kFeatureCount>& feature_names();

enum class SimilarFailuresMode {
  Count,  ///< prior failures sharing at least one failed class
  Sum,    ///< summed intersection sizes
};

struct FeatureConfig {
  std::vector<std::string> config_suffixes{".yaml", ".xml", ".properties"};
  std::vector<std::string> source_suffixes{".java"};
  SimilarFailuresMode similar_failures_mode = SimilarFailuresMode::Count;
};

/// Push-level counters derived from one patch.
struct PushFeatures {
  bool has_config_files = false;
  double config_lines_deleted = 0;
  double config_lines_added = 0;
  double config_lines_modified = 0;
  bool has_source_code = false;
  double source_lines_added = 0;
  double source_lines_deleted = 0;
  double source_lines_modified = 0;
  double modified_source_files = 0;
};

struct FeatureVector {
  // issue level
  double priority_ord = 3;
  double num_parallel_issues = 0;
  bool is_cross_projects = false;
  LinkFlags links;
  // comment level
  double num_prior_comments = 0;
  bool is_shared_same_emsg = false;
  double num_similar_failures = 0;
  // push level; without a patch the latency is missing and encodes as 0,
  // with has_code_patch = 0 acting as the missing indicator
  std::optional<double> ci_latency_hours;
  bool has_code_patch = false;
  PushFeatures push;

  std::array<double, kFeatureCount> to_array() const;
  /// The documented cross-field invariants (zero counts behind false flags).
  bool satisfies_invariants() const;
};

double priority_ordinal(Priority p);

/// Issues opened per UTC calendar day, built once per corpus.
class ParallelIssueIndex {
 public:
  explicit ParallelIssueIndex(const Corpus& corpus);
  /// Other issues opened on the same UTC day as `issue`.
  std::size_t count(const IssueReport& issue) const;

 private:
  std::map<std::chrono::sys_days, std::size_t> per_day_;
};

std::size_t count_parallel_issues(const IssueReport& issue, const Corpus& corpus);
std::size_t count_prior_comments(const IssueReport& issue, const BuildEvent& event);

/// True iff the current failed-class set is non-empty and every class in it
/// appeared in some earlier failure of the same issue. Non-failure entries in
/// `prior_events` are ignored.
bool shares_same_emsg(const BuildEvent& event, std::span<const BuildEvent> prior_events);

std::size_t count_similar_failures(const BuildEvent& event,
                                   std::span<const BuildEvent> prior_events,
                                   SimilarFailuresMode mode = SimilarFailuresMode::Count);

/// Hours between the triggering patch and the build; nullopt without a patch.
/// Throws NegativeLatency when the patch postdates the build.
std::optional<double> compute_ci_latency(const BuildEvent& event);

PushFeatures extract_patch_features(const Attachment& patch, const FeatureConfig& config = {});

FeatureVector build_feature_vector(const IssueReport& issue, const BuildEvent& event,
                                   std::size_t parallel_issues,
                                   std::span<const BuildEvent> prior_events,
                                   const FeatureConfig& config = {});
FeatureVector build_feature_vector(const IssueReport& issue, const BuildEvent& event,
                                   const Corpus& corpus,
                                   std::span<const BuildEvent> prior_events,
                                   const FeatureConfig& config = {});

/// HPEM baseline signal: the failed-class set is non-empty and equal to the
/// set of the immediately preceding failure in the same issue.
bool hpem_matches(const BuildEvent& event, std::span<const BuildEvent> prior_events);

/// One row per Failure event.
struct FeatureRow {
  std::string issue_id;
  std::size_t event_index = 0;  ///< comment index of the build comment
  bool heuristic_flag = false;
  bool hpem_match = false;
  FeatureVector features;
};

/// Features for every failure of a labelled corpus, in issue then timeline order.
std::vector<FeatureRow> extract_corpus_features(const Corpus& corpus,
                                                const CorpusLabeling& labeling,
                                                const FeatureConfig& config = {});

}  // namespace ubf
