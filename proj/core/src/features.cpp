#include "ubf/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ubf/error.hpp"
#include "ubf/parallel.hpp"

namespace ubf {

namespace {

bool ends_with_any(std::string_view path, const std::vector<std::string>& suffixes) {
  std::string lower(path);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::any_of(suffixes.begin(), suffixes.end(), [&](const std::string& s) {
    std::string suffix(s);
    std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower.size() >= suffix.size() &&
           lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0;
  });
}

std::vector<const BuildEvent*> prior_failures(std::span<const BuildEvent> prior_events) {
  std::vector<const BuildEvent*> out;
  for (const auto& e : prior_events) {
    if (e.status == BuildStatus::Failure) out.push_back(&e);
  }
  return out;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> kNames{
      "priority_ord",
      "num_parallel_issues",
      "is_cross_projects",
      "is_duplicate",
      "is_blocker",
      "is_blocked",
      "is_regression",
      "is_dependent",
      "is_incorporates",
      "is_required",
      "is_reference",
      "is_completes",
      "is_testing",
      "is_issue_split",
      "is_supercedes",
      "is_cloner",
      "is_container",
      "is_parent_feature",
      "is_child_issue",
      "num_prior_comments",
      "is_shared_same_emsg",
      "num_similar_failures",
      "ci_latency_hours",
      "has_code_patch",
      "has_config_files",
      "config_lines_deleted",
      "config_lines_added",
      "config_lines_modified",
      "has_source_code",
      "source_lines_added",
      "source_lines_deleted",
      "source_lines_modified",
      "modified_source_files",
  };
  return kNames;
}

std::array<double, kFeatureCount> FeatureVector::to_array() const {
  std::array<double, kFeatureCount> v{};
  std::size_t i = 0;
  v[i++] = priority_ord;
  v[i++] = num_parallel_issues;
  v[i++] = is_cross_projects ? 1.0 : 0.0;
  for (std::size_t k = 0; k < LinkFlags::kCount; ++k) v[i++] = links.get(k) ? 1.0 : 0.0;
  v[i++] = num_prior_comments;
  v[i++] = is_shared_same_emsg ? 1.0 : 0.0;
  v[i++] = num_similar_failures;
  v[i++] = ci_latency_hours.value_or(0.0);
  v[i++] = has_code_patch ? 1.0 : 0.0;
  v[i++] = push.has_config_files ? 1.0 : 0.0;
  v[i++] = push.config_lines_deleted;
  v[i++] = push.config_lines_added;
  v[i++] = push.config_lines_modified;
  v[i++] = push.has_source_code ? 1.0 : 0.0;
  v[i++] = push.source_lines_added;
  v[i++] = push.source_lines_deleted;
  v[i++] = push.source_lines_modified;
  v[i++] = push.modified_source_files;
  return v;
}

bool FeatureVector::satisfies_invariants() const {
  const auto values = to_array();
  if (std::any_of(values.begin(), values.end(), [](double v) { return v < 0; })) return false;
  if (priority_ord < 1 || priority_ord > 5) return false;
  if (!push.has_config_files && (push.config_lines_added != 0 || push.config_lines_deleted != 0 ||
                                 push.config_lines_modified != 0)) {
    return false;
  }
  if (!push.has_source_code &&
      (push.source_lines_added != 0 || push.source_lines_deleted != 0 ||
       push.source_lines_modified != 0 || push.modified_source_files != 0)) {
    return false;
  }
  if (!has_code_patch && (ci_latency_hours.has_value() || push.has_config_files ||
                          push.has_source_code)) {
    return false;
  }
  return has_code_patch == ci_latency_hours.has_value();
}

double priority_ordinal(Priority p) { return static_cast<double>(static_cast<int>(p)); }

ParallelIssueIndex::ParallelIssueIndex(const Corpus& corpus) {
  for (const auto& issue : corpus.issues) ++per_day_[utc_date(issue.created_at)];
}

std::size_t ParallelIssueIndex::count(const IssueReport& issue) const {
  const auto it = per_day_.find(utc_date(issue.created_at));
  return it == per_day_.end() || it->second == 0 ? 0 : it->second - 1;
}

std::size_t count_parallel_issues(const IssueReport& issue, const Corpus& corpus) {
  return ParallelIssueIndex(corpus).count(issue);
}

std::size_t count_prior_comments(const IssueReport& issue, const BuildEvent& event) {
  return std::min(event.comment_index, issue.comments.size());
}

bool shares_same_emsg(const BuildEvent& event, std::span<const BuildEvent> prior_events) {
  if (event.failed_classes.empty()) return false;
  std::set<std::string> seen;
  for (const BuildEvent* p : prior_failures(prior_events)) {
    seen.insert(p->failed_classes.begin(), p->failed_classes.end());
  }
  return std::includes(seen.begin(), seen.end(), event.failed_classes.begin(),
                       event.failed_classes.end());
}

std::size_t count_similar_failures(const BuildEvent& event,
                                   std::span<const BuildEvent> prior_events,
                                   SimilarFailuresMode mode) {
  std::size_t total = 0;
  for (const BuildEvent* p : prior_failures(prior_events)) {
    std::size_t shared = 0;
    for (const auto& cls : event.failed_classes) shared += p->failed_classes.count(cls);
    if (mode == SimilarFailuresMode::Sum) {
      total += shared;
    } else if (shared > 0) {
      ++total;
    }
  }
  return total;
}

std::optional<double> compute_ci_latency(const BuildEvent& event) {
  if (!event.triggering_patch) return std::nullopt;
  const double hours = hours_between(event.triggering_patch->attached_at, event.posted_at);
  if (hours < 0) {
    throw NegativeLatency("patch " + event.triggering_patch->filename + " of " +
                          event.issue_id + " is attached after the build it triggered");
  }
  return hours;
}

PushFeatures extract_patch_features(const Attachment& patch, const FeatureConfig& config) {
  PushFeatures f;
  if (!patch.line_stats) return f;
  std::set<std::string> source_paths;
  for (const auto& [path, counts] : *patch.line_stats) {
    // A file only counts as touched when at least one line changed.
    if (counts.added + counts.deleted + counts.modified < 1) continue;
    if (ends_with_any(path, config.config_suffixes)) {
      f.has_config_files = true;
      f.config_lines_added += static_cast<double>(counts.added);
      f.config_lines_deleted += static_cast<double>(counts.deleted);
      f.config_lines_modified += static_cast<double>(counts.modified);
    }
    if (ends_with_any(path, config.source_suffixes)) {
      f.has_source_code = true;
      f.source_lines_added += static_cast<double>(counts.added);
      f.source_lines_deleted += static_cast<double>(counts.deleted);
      f.source_lines_modified += static_cast<double>(counts.modified);
      source_paths.insert(path);
    }
  }
  f.modified_source_files = static_cast<double>(source_paths.size());
  return f;
}

FeatureVector build_feature_vector(const IssueReport& issue, const BuildEvent& event,
                                   std::size_t parallel_issues,
                                   std::span<const BuildEvent> prior_events,
                                   const FeatureConfig& config) {
  FeatureVector v;
  v.priority_ord = priority_ordinal(issue.priority);
  v.num_parallel_issues = static_cast<double>(parallel_issues);
  v.is_cross_projects = issue.is_cross_project;
  v.links = issue.link_flags;

  v.num_prior_comments = static_cast<double>(count_prior_comments(issue, event));
  v.is_shared_same_emsg = shares_same_emsg(event, prior_events);
  v.num_similar_failures = static_cast<double>(
      count_similar_failures(event, prior_events, config.similar_failures_mode));

  v.ci_latency_hours = compute_ci_latency(event);
  v.has_code_patch = event.triggering_patch.has_value();
  if (event.triggering_patch) v.push = extract_patch_features(*event.triggering_patch, config);
  return v;
}

FeatureVector build_feature_vector(const IssueReport& issue, const BuildEvent& event,
                                   const Corpus& corpus,
                                   std::span<const BuildEvent> prior_events,
                                   const FeatureConfig& config) {
  return build_feature_vector(issue, event, count_parallel_issues(issue, corpus), prior_events,
                              config);
}

bool hpem_matches(const BuildEvent& event, std::span<const BuildEvent> prior_events) {
  if (event.failed_classes.empty()) return false;
  const auto failures = prior_failures(prior_events);
  return !failures.empty() && failures.back()->failed_classes == event.failed_classes;
}

std::vector<FeatureRow> extract_corpus_features(const Corpus& corpus,
                                                const CorpusLabeling& labeling,
                                                const FeatureConfig& config) {
  const ParallelIssueIndex parallel(corpus);

  std::map<std::string, std::vector<BuildEvent>, std::less<>> events_by_issue;
  for (const auto& e : labeling.events) events_by_issue[e.issue_id].push_back(e);
  std::map<std::pair<std::string, std::size_t>, bool> flags;
  for (const auto& l : labeling.labels) flags[{l.issue_id, l.comment_index}] = l.flagged;

  std::vector<std::vector<FeatureRow>> per_issue(corpus.issues.size());
  parallel_for(corpus.issues.size(), [&](std::size_t i) {
    const IssueReport& issue = corpus.issues[i];
    const auto it = events_by_issue.find(issue.issue_id);
    if (it == events_by_issue.end()) return;
    const std::vector<BuildEvent>& events = it->second;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const BuildEvent& ev = events[e];
      if (ev.status != BuildStatus::Failure) continue;
      const std::span<const BuildEvent> prior(events.data(), e);
      FeatureRow row;
      row.issue_id = issue.issue_id;
      row.event_index = ev.comment_index;
      const auto flag = flags.find({issue.issue_id, ev.comment_index});
      row.heuristic_flag = flag != flags.end() && flag->second;
      row.hpem_match = hpem_matches(ev, prior);
      row.features = build_feature_vector(issue, ev, parallel.count(issue), prior, config);
      per_issue[i].push_back(std::move(row));
    }
  });

  std::vector<FeatureRow> rows;
  for (auto& chunk : per_issue) {
    for (auto& r : chunk) rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ubf
