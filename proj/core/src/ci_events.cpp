#include "ubf/ci_events.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <regex>

#include "ubf/error.hpp"

namespace ubf {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Position of the first standalone occurrence of `marker` in `text`
// (both already lowercased), or npos.
std::size_t find_marker(const std::string& text, const std::string& marker) {
  if (marker.empty()) return std::string::npos;
  for (std::size_t pos = text.find(marker); pos != std::string::npos;
       pos = text.find(marker, pos + 1)) {
    const std::size_t end = pos + marker.size();
    const bool left_ok = pos == 0 || !is_alnum(text[pos - 1]);
    const bool right_ok = end >= text.size() || !is_alnum(text[end]);
    if (left_ok && right_ok) return pos;
  }
  return std::string::npos;
}

std::size_t first_marker(const std::string& text, const std::vector<std::string>& markers) {
  std::size_t best = std::string::npos;
  for (const auto& m : markers) best = std::min(best, find_marker(text, lowercase(m)));
  return best;
}

const std::regex& cached_regex(const std::string& pattern) {
  thread_local std::map<std::string, std::unique_ptr<std::regex>> cache;
  auto& slot = cache[pattern];
  if (!slot) {
    try {
      slot = std::make_unique<std::regex>(pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      cache.erase(pattern);
      throw DataError("invalid failed_class_regex '" + pattern + "': " + e.what());
    }
  }
  return *slot;
}

bool has_qa_token(std::string_view author) {
  std::string token;
  auto flush = [&] {
    const bool hit = lowercase(token) == "qa";
    token.clear();
    return hit;
  };
  for (char c : author) {
    if (is_alnum(c)) {
      token.push_back(c);
    } else if (flush()) {
      return true;
    }
  }
  return flush();
}

}  // namespace

std::string_view to_string(BuildStatus status) {
  return status == BuildStatus::Success ? "Success" : "Failure";
}

std::string detect_qa_bot(const Corpus& corpus, const CiConfig& config) {
  if (config.qa_bot_override && !config.qa_bot_override->empty()) {
    return *config.qa_bot_override;
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& issue : corpus.issues) {
    for (const auto& c : issue.comments) ++counts[c.author];
  }

  const std::string expected = lowercase(corpus.project + " QA");
  auto pick = [&](auto&& accept) -> std::optional<std::string> {
    std::optional<std::string> best;
    std::size_t best_count = 0;
    // std::map iterates lexicographically, so strict > keeps the smallest name on ties.
    for (const auto& [author, n] : counts) {
      if (!accept(author)) continue;
      if (!best || n > best_count) {
        best = author;
        best_count = n;
      }
    }
    return best;
  };

  if (auto exact = pick([&](const std::string& a) { return lowercase(a) == expected; })) {
    return *exact;
  }
  if (auto token = pick([](const std::string& a) { return has_qa_token(a); })) {
    return *token;
  }
  throw NoBotFound("no comment author carries a 'QA' token in project '" +
                   corpus.project + "'");
}

std::optional<BuildStatus> classify_bot_comment(std::string_view body,
                                                const CiConfig& config) {
  const std::string text = lowercase(body);
  const std::size_t fail_pos = first_marker(text, config.failure_markers);
  const std::size_t ok_pos = first_marker(text, config.success_markers);
  if (fail_pos == std::string::npos && ok_pos == std::string::npos) return std::nullopt;
  if (ok_pos < fail_pos) return BuildStatus::Success;
  return BuildStatus::Failure;
}

std::set<std::string> extract_failed_classes(std::string_view body, const CiConfig& config) {
  std::set<std::string> out;
  const std::regex& re = cached_regex(config.failed_class_regex);
  const std::string text(body);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.insert(it->str());
  }
  return out;
}

bool is_patch_file(std::string_view filename, const CiConfig& config) {
  const std::string name = lowercase(filename);
  return std::any_of(config.patch_suffixes.begin(), config.patch_suffixes.end(),
                     [&](const std::string& suffix) {
                       const std::string s = lowercase(suffix);
                       return name.size() >= s.size() &&
                              name.compare(name.size() - s.size(), s.size(), s) == 0;
                     });
}

std::vector<BuildEvent> extract_build_events(const IssueReport& issue, std::string_view bot,
                                             const CiConfig& config) {
  std::vector<Attachment> patches;
  for (auto& a : issue.all_attachments()) {
    if (is_patch_file(a.filename, config)) patches.push_back(std::move(a));
  }

  std::vector<BuildEvent> events;
  for (std::size_t i = 0; i < issue.comments.size(); ++i) {
    const Comment& c = issue.comments[i];
    if (c.author != bot) continue;

    BuildEvent ev;
    ev.issue_id = issue.issue_id;
    ev.comment_index = i;
    ev.posted_at = c.posted_at;
    ev.raw_body = c.body;
    const auto status = classify_bot_comment(c.body, config);
    ev.status = status.value_or(BuildStatus::Failure);
    ev.parse_warning = !status.has_value();
    if (ev.status == BuildStatus::Failure && status.has_value()) {
      ev.failed_classes = extract_failed_classes(c.body, config);
    }

    // Latest patch strictly before the build comment; later list entries
    // win ties on the timestamp.
    for (const Attachment& p : patches) {
      if (p.attached_at >= c.posted_at) continue;
      if (!ev.triggering_patch || p.attached_at >= ev.triggering_patch->attached_at) {
        ev.triggering_patch = p;
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace ubf
