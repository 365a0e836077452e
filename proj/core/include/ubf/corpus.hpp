#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/timestamp.hpp"

namespace ubf {

enum class Priority { Trivial = 1, Minor = 2, Major = 3, Critical = 4, Blocker = 5 };

std::string_view to_string(Priority p);
/// Case-insensitive; unknown strings are rejected rather than coerced.
std::optional<Priority> parse_priority(std::string_view text);

/// Issue-link flags as exported by the tracker. Absent links are false.
struct LinkFlags {
  bool is_duplicate = false;
  bool is_blocker = false;
  bool is_blocked = false;
  bool is_regression = false;
  bool is_dependent = false;
  bool is_incorporates = false;
  bool is_required = false;
  bool is_reference = false;
  bool is_completes = false;
  bool is_testing = false;
  bool is_issue_split = false;
  bool is_supercedes = false;
  bool is_cloner = false;
  bool is_container = false;
  bool is_parent_feature = false;
  bool is_child_issue = false;

  static constexpr std::size_t kCount = 16;
  /// Field names, in declaration order; also the keys of the "links" object.
  static const std::array<std::string_view, kCount>& names();

  bool get(std::size_t i) const;
  void set(std::size_t i, bool value);

  friend bool operator==(const LinkFlags&, const LinkFlags&) = default;
};

struct LineCounts {
  std::int64_t added = 0;
  std::int64_t deleted = 0;
  std::int64_t modified = 0;

  friend bool operator==(const LineCounts&, const LineCounts&) = default;
};

/// Per-file line counts of a patch, keyed by file path.
using PatchLineStats = std::map<std::string, LineCounts>;

struct Attachment {
  std::string filename;
  Timestamp attached_at;
  std::optional<PatchLineStats> line_stats;

  friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct Comment {
  std::string author;
  Timestamp posted_at;
  std::string body;
  std::vector<Attachment> attachments;

  friend bool operator==(const Comment&, const Comment&) = default;
};

struct IssueReport {
  std::string issue_id;
  std::string project;
  Timestamp created_at;
  Priority priority = Priority::Major;
  LinkFlags link_flags;
  bool is_cross_project = false;
  std::vector<Comment> comments;
  /// Attachments recorded on the issue itself rather than on a comment.
  std::vector<Attachment> attachments;

  /// Issue-level attachments followed by comment attachments, in order.
  std::vector<Attachment> all_attachments() const;

  friend bool operator==(const IssueReport&, const IssueReport&) = default;
};

struct Corpus {
  std::string project;
  std::vector<IssueReport> issues;

  const IssueReport* find(std::string_view issue_id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct Violation {
  std::string issue_id;
  std::string rule;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Rule names reported by validate_corpus.
inline constexpr std::string_view kRuleDuplicateId = "duplicate_id";
inline constexpr std::string_view kRuleCommentsUnordered = "comments_unordered";
inline constexpr std::string_view kRuleCommentBeforeCreation = "comment_before_creation";
inline constexpr std::string_view kRuleProjectMismatch = "project_mismatch";
inline constexpr std::string_view kRuleEmptyFilename = "empty_attachment_filename";
inline constexpr std::string_view kRuleEmptyIssueId = "empty_issue_id";

/// Parses one export record. Schema errors throw ParseError; semantic
/// invariants are left to validate_corpus.
IssueReport parse_issue_record(std::string_view json_line);
std::string serialize_issue_record(const IssueReport& issue);

/// Reads records without enforcing corpus invariants, keeping comments in file
/// order. Schema errors throw MalformedRecord with the 1-based line number.
/// `project` may be empty, in which case it is taken from the first record.
Corpus read_corpus_records(const std::filesystem::path& path, std::string project);

/// Loads a corpus: comments are stable-sorted by timestamp, then every
/// invariant is checked. Throws MalformedRecord on the first violation and
/// EmptyCorpus when no issue parses.
Corpus load_corpus(const std::filesystem::path& path, std::string project);

/// Writes one record per issue; load_corpus of the result reproduces `corpus`.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Every invariant violation, in issue order.
std::vector<Violation> validate_corpus(const Corpus& corpus);

}  // namespace ubf
