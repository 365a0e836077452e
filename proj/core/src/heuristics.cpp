#include "ubf/heuristics.hpp"

#include <algorithm>
#include <cctype>

#include "ubf/error.hpp"
#include "ubf/stats.hpp"

namespace ubf {

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Token offset of the first occurrence of `needle` in `hay`, or npos.
std::size_t find_sequence(const std::vector<std::string>& hay,
                          const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return std::string::npos;
  const auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end());
  return it == hay.end() ? std::string::npos
                         : static_cast<std::size_t>(it - hay.begin());
}

}  // namespace

const std::vector<std::string>& default_unrelated_keywords() {
  static const std::vector<std::string> kKeywords{
      "not related",  "unrelated",   "irrelevant",   "not relevant",   "not connected",
      "unconnected",  "not linked",  "uncorrelated", "not correlated"};
  return kKeywords;
}

std::optional<KeywordHit> scan_keywords(std::span<const Comment> window,
                                        const std::vector<std::string>& keywords) {
  std::vector<std::vector<std::string>> keyword_tokens;
  keyword_tokens.reserve(keywords.size());
  for (const auto& k : keywords) keyword_tokens.push_back(tokenize(k));

  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto tokens = tokenize(window[i].body);
    std::size_t best_pos = std::string::npos;
    std::size_t best_keyword = 0;
    for (std::size_t k = 0; k < keyword_tokens.size(); ++k) {
      const std::size_t pos = find_sequence(tokens, keyword_tokens[k]);
      if (pos < best_pos) {
        best_pos = pos;
        best_keyword = k;
      }
    }
    if (best_pos != std::string::npos) return KeywordHit{i, keywords[best_keyword]};
  }
  return std::nullopt;
}

std::vector<HeuristicLabel> label_potential_unrelated(const IssueReport& issue,
                                                      std::span<const BuildEvent> events,
                                                      const std::vector<std::string>& keywords) {
  std::vector<HeuristicLabel> labels;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const BuildEvent& ev = events[e];
    if (ev.status != BuildStatus::Failure) continue;

    HeuristicLabel label;
    label.issue_id = issue.issue_id;
    label.event_ordinal = e;
    label.comment_index = ev.comment_index;

    const std::size_t begin = ev.comment_index + 1;
    const std::size_t end = e + 1 < events.size()
                                ? events[e + 1].comment_index
                                : issue.comments.size();
    if (begin < end) {
      const std::span<const Comment> window(issue.comments.data() + begin, end - begin);
      if (auto hit = scan_keywords(window, keywords)) {
        label.flagged = true;
        label.matching_comment_index = begin + hit->index;
        label.matched_keyword = std::move(hit->keyword);
      }
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

TimeMisspent compute_time_misspent(const HeuristicLabel& label, const IssueReport& issue) {
  if (!label.flagged || !label.matching_comment_index) {
    throw NotFlagged("failure at comment " + std::to_string(label.comment_index) + " of " +
                     label.issue_id + " is not flagged");
  }
  const Timestamp start = issue.comments.at(label.comment_index).posted_at;
  const Timestamp confirm = issue.comments.at(*label.matching_comment_index).posted_at;
  const double hours = std::max(0.0, hours_between(start, confirm));
  return {label.issue_id, label.comment_index, hours};
}

double prevalence(std::size_t flagged, std::size_t failures) {
  if (failures == 0) throw DivisionByZero("prevalence: no build failures");
  return static_cast<double>(flagged) / static_cast<double>(failures);
}

double prevalence(std::span<const BuildEvent> events, std::span<const HeuristicLabel> labels) {
  const auto failures = static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(),
                    [](const BuildEvent& e) { return e.status == BuildStatus::Failure; }));
  const auto flagged = static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](const HeuristicLabel& l) { return l.flagged; }));
  return prevalence(flagged, failures);
}

TimeMisspentSummary summarize_time_misspent(std::span<const TimeMisspent> values) {
  std::vector<double> hours;
  hours.reserve(values.size());
  for (const auto& v : values) hours.push_back(v.hours);
  TimeMisspentSummary s;
  s.n = hours.size();
  s.median = median(hours);
  s.mean = mean(hours);
  for (double h : hours) s.total += h;
  s.stddev = sample_stddev(hours);
  return s;
}

std::size_t CorpusLabeling::failure_count() const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(),
                    [](const BuildEvent& e) { return e.status == BuildStatus::Failure; }));
}

std::size_t CorpusLabeling::flagged_count() const {
  return static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](const HeuristicLabel& l) { return l.flagged; }));
}

CorpusLabeling label_corpus(const Corpus& corpus, const CiConfig& ci,
                            const std::vector<std::string>& keywords) {
  CorpusLabeling out;
  out.bot = detect_qa_bot(corpus, ci);
  for (const IssueReport& issue : corpus.issues) {
    auto events = extract_build_events(issue, out.bot, ci);
    auto labels = label_potential_unrelated(issue, events, keywords);
    for (const auto& l : labels) {
      if (l.flagged) out.time_misspent.push_back(compute_time_misspent(l, issue));
    }
    out.events.insert(out.events.end(), events.begin(), events.end());
    out.labels.insert(out.labels.end(), labels.begin(), labels.end());
  }
  return out;
}

}  // namespace ubf
