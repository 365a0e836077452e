#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ubf/ci_events.hpp"
#include "ubf/corpus.hpp"

namespace ubf {

/// Phrases developers use when a failure has nothing to do with their push.
const std::vector<std::string>& default_unrelated_keywords();

struct KeywordHit {
  std::size_t index = 0;  ///< position within the scanned window
  std::string keyword;
};

/// First comment (lowest index) whose body contains a keyword as a
/// contiguous, case-insensitive token sequence. Within that comment the
/// earliest occurrence wins; keyword-list order breaks position ties.
std::optional<KeywordHit> scan_keywords(std::span<const Comment> window,
                                        const std::vector<std::string>& keywords =
                                            default_unrelated_keywords());

struct HeuristicLabel {
  std::string issue_id;
  std::size_t event_ordinal = 0;   ///< index into the issue's event list
  std::size_t comment_index = 0;   ///< the build comment's position
  bool flagged = false;
  std::optional<std::size_t> matching_comment_index;
  std::optional<std::string> matched_keyword;
};

/// One label per Failure event. The window of a failure is every comment
/// strictly after it and strictly before the next build comment (or the end
/// of the issue); build comments themselves are never scanned.
std::vector<HeuristicLabel> label_potential_unrelated(
    const IssueReport& issue, std::span<const BuildEvent> events,
    const std::vector<std::string>& keywords = default_unrelated_keywords());

struct TimeMisspent {
  std::string issue_id;
  std::size_t comment_index = 0;
  double hours = 0.0;
};

/// Hours from the bot's failure notification to the confirming comment.
/// Throws NotFlagged for unflagged labels.
TimeMisspent compute_time_misspent(const HeuristicLabel& label, const IssueReport& issue);

/// Flagged failures over all failures. Throws DivisionByZero with no failures.
double prevalence(std::span<const BuildEvent> events, std::span<const HeuristicLabel> labels);
double prevalence(std::size_t flagged, std::size_t failures);

struct TimeMisspentSummary {
  std::size_t n = 0;
  double median = 0.0;
  double mean = 0.0;
  double total = 0.0;
  double stddev = 0.0;
};

TimeMisspentSummary summarize_time_misspent(std::span<const TimeMisspent> values);

/// Events and labels for a whole corpus, in issue order.
struct CorpusLabeling {
  std::string bot;
  std::vector<BuildEvent> events;
  std::vector<HeuristicLabel> labels;
  std::vector<TimeMisspent> time_misspent;

  std::size_t failure_count() const;
  std::size_t flagged_count() const;
};

CorpusLabeling label_corpus(const Corpus& corpus, const CiConfig& ci = {},
                            const std::vector<std::string>& keywords =
                                default_unrelated_keywords());

}  // namespace ubf
