#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/corpus.hpp"

namespace ubf {

enum class BuildStatus { Success, Failure };

std::string_view to_string(BuildStatus status);

/// Per-project knobs for reading QA-bot comments. Defaults match the Apache
/// QA bots' wording.
struct CiConfig {
  std::optional<std::string> qa_bot_override;
  std::vector<std::string> failure_markers{"-1", "FAILURE", "Tests failed",
                                           "build failed"};
  std::vector<std::string> success_markers{"+1 overall", "SUCCESS"};
  std::string failed_class_regex =
      R"(([A-Za-z_][\w$]*\.)+(Test[\w$]*|[\w$]*Test|[\w$]*Exception))";
  std::vector<std::string> patch_suffixes{".patch", ".diff"};
};

struct BuildEvent {
  std::string issue_id;
  std::size_t comment_index = 0;
  Timestamp posted_at;
  BuildStatus status = BuildStatus::Failure;
  std::set<std::string> failed_classes;
  std::string raw_body;
  std::optional<Attachment> triggering_patch;
  /// Set when the body matched neither marker list and Failure was inferred.
  bool parse_warning = false;
};

/// The QA bot's author name: an exact (case-insensitive) "<project> QA"
/// author wins; otherwise the author carrying a "QA" token with the most
/// comments, ties broken lexicographically. Throws NoBotFound.
std::string detect_qa_bot(const Corpus& corpus, const CiConfig& config = {});

/// Classifies one bot comment body. A marker only counts when it is not
/// glued to a neighbouring letter or digit, so "HIVE-1234" is not "-1".
/// Returns nullopt when no marker of either kind is present.
std::optional<BuildStatus> classify_bot_comment(std::string_view body,
                                                const CiConfig& config = {});

/// Distinct fully-qualified test/exception class names in `body`.
std::set<std::string> extract_failed_classes(std::string_view body,
                                             const CiConfig& config = {});

/// One event per comment authored by `bot`, in timeline order. The
/// triggering patch is the latest patch attachment strictly before the event.
std::vector<BuildEvent> extract_build_events(const IssueReport& issue,
                                             std::string_view bot,
                                             const CiConfig& config = {});

bool is_patch_file(std::string_view filename, const CiConfig& config = {});

}  // namespace ubf
