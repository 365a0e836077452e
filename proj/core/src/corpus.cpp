#include "ubf/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "ubf/error.hpp"
#include "ubf/io.hpp"

namespace ubf {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Priority, std::string_view>, 5> kPriorityNames{{
    {Priority::Blocker, "Blocker"},
    {Priority::Critical, "Critical"},
    {Priority::Major, "Major"},
    {Priority::Minor, "Minor"},
    {Priority::Trivial, "Trivial"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Timestamp require_time(const json& obj, const char* key) {
  return parse_timestamp(require_string(obj, key));
}

std::int64_t require_count(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return 0;
  if (!it->is_number_integer()) {
    throw ParseError(std::string("line count '") + key + "' must be an integer");
  }
  const auto v = it->get<std::int64_t>();
  if (v < 0) throw ParseError(std::string("line count '") + key + "' is negative");
  return v;
}

Attachment parse_attachment(const json& obj) {
  if (!obj.is_object()) throw ParseError("attachment must be an object");
  Attachment a;
  a.filename = require_string(obj, "filename");
  a.attached_at = require_time(obj, "attached_at");
  auto stats = obj.find("line_stats");
  if (stats != obj.end() && !stats->is_null()) {
    if (!stats->is_object()) throw ParseError("line_stats must be an object");
    PatchLineStats parsed;
    for (const auto& [path, counts] : stats->items()) {
      if (!counts.is_object()) throw ParseError("line_stats entry must be an object");
      parsed[path] = LineCounts{require_count(counts, "added"),
                                require_count(counts, "deleted"),
                                require_count(counts, "modified")};
    }
    a.line_stats = std::move(parsed);
  }
  return a;
}

std::vector<Attachment> parse_attachments(const json& obj) {
  std::vector<Attachment> out;
  auto it = obj.find("attachments");
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError("attachments must be an array");
  for (const auto& a : *it) out.push_back(parse_attachment(a));
  return out;
}

json attachment_to_json(const Attachment& a) {
  json obj = {{"filename", a.filename}, {"attached_at", format_timestamp(a.attached_at)}};
  if (a.line_stats) {
    json stats = json::object();
    for (const auto& [path, c] : *a.line_stats) {
      stats[path] = {{"added", c.added}, {"deleted", c.deleted}, {"modified", c.modified}};
    }
    obj["line_stats"] = std::move(stats);
  }
  return obj;
}

struct NumberedIssue {
  std::size_t line;
  IssueReport issue;
};

std::vector<NumberedIssue> read_numbered(const std::filesystem::path& path,
                                         std::string& project) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  std::vector<NumberedIssue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    try {
      out.push_back({line_no, parse_issue_record(line)});
    } catch (const ParseError& e) {
      throw MalformedRecord(line_no, e.what());
    }
    if (project.empty()) project = out.back().issue.project;
  }
  return out;
}

void check_issue(const IssueReport& issue, std::string_view project,
                 std::vector<Violation>& out) {
  auto add = [&](std::string_view rule, std::string detail) {
    out.push_back({issue.issue_id, std::string(rule), std::move(detail)});
  };
  if (issue.issue_id.empty()) add(kRuleEmptyIssueId, "issue_id is empty");
  if (!project.empty() && issue.project != project) {
    add(kRuleProjectMismatch, "project '" + issue.project + "' != corpus '" +
                                  std::string(project) + "'");
  }
  for (std::size_t i = 0; i < issue.comments.size(); ++i) {
    const Comment& c = issue.comments[i];
    if (c.posted_at < issue.created_at) {
      add(kRuleCommentBeforeCreation,
          "comment " + std::to_string(i) + " at " + format_timestamp(c.posted_at) +
              " precedes creation " + format_timestamp(issue.created_at));
    }
    if (i + 1 < issue.comments.size() &&
        issue.comments[i + 1].posted_at < c.posted_at) {
      add(kRuleCommentsUnordered, "comment " + std::to_string(i + 1) +
                                      " is earlier than comment " + std::to_string(i));
    }
  }
  for (const Attachment& a : issue.all_attachments()) {
    if (a.filename.empty()) add(kRuleEmptyFilename, "attachment without filename");
  }
}

}  // namespace

std::string_view to_string(Priority p) {
  for (const auto& [value, name] : kPriorityNames) {
    if (value == p) return name;
  }
  return "Major";
}

std::optional<Priority> parse_priority(std::string_view text) {
  for (const auto& [value, name] : kPriorityNames) {
    if (iequals(text, name)) return value;
  }
  return std::nullopt;
}

const std::array<std::string_view, LinkFlags::kCount>& LinkFlags::names() {
  static const std::array<std::string_view, kCount> kNames{
      "is_duplicate",  "is_blocker",    "is_blocked",     "is_regression",
      "is_dependent",  "is_incorporates", "is_required",  "is_reference",
      "is_completes",  "is_testing",    "is_issue_split", "is_supercedes",
      "is_cloner",     "is_container",  "is_parent_feature", "is_child_issue"};
  return kNames;
}

bool LinkFlags::get(std::size_t i) const {
  const std::array<const bool*, kCount> fields{
      &is_duplicate, &is_blocker,  &is_blocked,     &is_regression,
      &is_dependent, &is_incorporates, &is_required, &is_reference,
      &is_completes, &is_testing,  &is_issue_split, &is_supercedes,
      &is_cloner,    &is_container, &is_parent_feature, &is_child_issue};
  return *fields.at(i);
}

void LinkFlags::set(std::size_t i, bool value) {
  const std::array<bool*, kCount> fields{
      &is_duplicate, &is_blocker,  &is_blocked,     &is_regression,
      &is_dependent, &is_incorporates, &is_required, &is_reference,
      &is_completes, &is_testing,  &is_issue_split, &is_supercedes,
      &is_cloner,    &is_container, &is_parent_feature, &is_child_issue};
  *fields.at(i) = value;
}

std::vector<Attachment> IssueReport::all_attachments() const {
  std::vector<Attachment> out = attachments;
  for (const Comment& c : comments) {
    out.insert(out.end(), c.attachments.begin(), c.attachments.end());
  }
  return out;
}

const IssueReport* Corpus::find(std::string_view issue_id) const {
  for (const auto& issue : issues) {
    if (issue.issue_id == issue_id) return &issue;
  }
  return nullptr;
}

IssueReport parse_issue_record(std::string_view json_line) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError("record must be a JSON object");

  IssueReport issue;
  issue.issue_id = require_string(obj, "issue_id");
  issue.project = require_string(obj, "project");
  issue.created_at = require_time(obj, "created_at");
  const std::string priority = require_string(obj, "priority");
  const auto parsed = parse_priority(priority);
  if (!parsed) throw ParseError("unknown priority '" + priority + "'");
  issue.priority = *parsed;

  auto links = obj.find("links");
  if (links != obj.end() && !links->is_null()) {
    if (!links->is_object()) throw ParseError("links must be an object");
    const auto& names = LinkFlags::names();
    for (std::size_t i = 0; i < LinkFlags::kCount; ++i) {
      auto it = links->find(std::string(names[i]));
      if (it == links->end()) continue;
      if (!it->is_boolean()) {
        throw ParseError("link flag '" + std::string(names[i]) + "' must be boolean");
      }
      issue.link_flags.set(i, it->get<bool>());
    }
  }

  auto cross = obj.find("is_cross_project");
  if (cross != obj.end() && !cross->is_null()) {
    if (!cross->is_boolean()) throw ParseError("is_cross_project must be boolean");
    issue.is_cross_project = cross->get<bool>();
  }

  auto comments = obj.find("comments");
  if (comments != obj.end() && !comments->is_null()) {
    if (!comments->is_array()) throw ParseError("comments must be an array");
    for (const auto& c : *comments) {
      if (!c.is_object()) throw ParseError("comment must be an object");
      Comment comment;
      comment.author = require_string(c, "author");
      comment.posted_at = require_time(c, "posted_at");
      comment.body = require_string(c, "body");
      comment.attachments = parse_attachments(c);
      issue.comments.push_back(std::move(comment));
    }
  }
  issue.attachments = parse_attachments(obj);
  return issue;
}

std::string serialize_issue_record(const IssueReport& issue) {
  json links = json::object();
  const auto& names = LinkFlags::names();
  for (std::size_t i = 0; i < LinkFlags::kCount; ++i) {
    links[std::string(names[i])] = issue.link_flags.get(i);
  }
  json comments = json::array();
  for (const Comment& c : issue.comments) {
    json attachments = json::array();
    for (const Attachment& a : c.attachments) attachments.push_back(attachment_to_json(a));
    comments.push_back({{"author", c.author},
                        {"posted_at", format_timestamp(c.posted_at)},
                        {"body", c.body},
                        {"attachments", std::move(attachments)}});
  }
  json obj = {{"issue_id", issue.issue_id},
              {"project", issue.project},
              {"created_at", format_timestamp(issue.created_at)},
              {"priority", std::string(to_string(issue.priority))},
              {"links", std::move(links)},
              {"is_cross_project", issue.is_cross_project},
              {"comments", std::move(comments)}};
  if (!issue.attachments.empty()) {
    json attachments = json::array();
    for (const Attachment& a : issue.attachments) attachments.push_back(attachment_to_json(a));
    obj["attachments"] = std::move(attachments);
  }
  return obj.dump();
}

Corpus read_corpus_records(const std::filesystem::path& path, std::string project) {
  Corpus corpus;
  for (auto& numbered : read_numbered(path, project)) {
    corpus.issues.push_back(std::move(numbered.issue));
  }
  corpus.project = std::move(project);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, std::string project) {
  auto numbered = read_numbered(path, project);
  if (numbered.empty()) throw EmptyCorpus("no issues in '" + path.string() + "'");

  std::set<std::string> seen;
  Corpus corpus;
  corpus.project = project;
  for (auto& [line, issue] : numbered) {
    std::stable_sort(issue.comments.begin(), issue.comments.end(),
                     [](const Comment& a, const Comment& b) {
                       return a.posted_at < b.posted_at;
                     });
    std::vector<Violation> violations;
    check_issue(issue, project, violations);
    if (!seen.insert(issue.issue_id).second) {
      violations.push_back({issue.issue_id, std::string(kRuleDuplicateId), ""});
    }
    if (!violations.empty()) {
      const Violation& v = violations.front();
      throw MalformedRecord(line, v.rule + " (" + v.issue_id +
                                      (v.detail.empty() ? "" : ": " + v.detail) + ")");
    }
    corpus.issues.push_back(std::move(issue));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const IssueReport& issue : corpus.issues) {
    out += serialize_issue_record(issue);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  for (const IssueReport& issue : corpus.issues) {
    if (!seen.insert(issue.issue_id).second) {
      out.push_back({issue.issue_id, std::string(kRuleDuplicateId),
                     "issue_id appears more than once"});
    }
    check_issue(issue, corpus.project, out);
  }
  return out;
}

}  // namespace ubf
