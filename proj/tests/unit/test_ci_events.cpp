#include <algorithm>
#include <string>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ubf/ci_events.hpp"
#include "ubf/error.hpp"

namespace {

using namespace ubf;
using namespace ubf::test;

TEST(CiEvents, DetectsFixtureBot) {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  EXPECT_EQ(detect_qa_bot(c), "Hive QA");
}

TEST(CiEvents, BotFallbackPicksMostActiveQaAuthor) {
  Corpus c;
  c.project = "ZOO";
  IssueReport r = issue("ZOO-1", "2016-01-01T00:00:00Z", "ZOO");
  for (int i = 0; i < 3; ++i) r.comments.push_back(comment("Lint QA", "2016-01-01T01:00:00Z", "+1"));
  for (int i = 0; i < 5; ++i) r.comments.push_back(comment("Build QA", "2016-01-01T02:00:00Z", "-1"));
  r.comments.push_back(comment("qualified", "2016-01-01T03:00:00Z", "x"));
  c.issues.push_back(r);
  EXPECT_EQ(detect_qa_bot(c), "Build QA");
  CiConfig cfg;
  cfg.qa_bot_override = "Lint QA";
  EXPECT_EQ(detect_qa_bot(c, cfg), "Lint QA");
}

TEST(CiEvents, NoBotThrows) {
  Corpus c;
  c.project = "ZOO";
  IssueReport r = issue("ZOO-1", "2016-01-01T00:00:00Z", "ZOO");
  r.comments.push_back(comment("alice", "2016-01-01T01:00:00Z", "hi"));
  c.issues.push_back(r);
  EXPECT_THROW(detect_qa_bot(c), NoBotFound);
}

TEST(CiEvents, MarkersRespectWordBoundaries) {
  EXPECT_EQ(classify_bot_comment("-1 overall"), BuildStatus::Failure);
  EXPECT_EQ(classify_bot_comment("+1 overall. All good"), BuildStatus::Success);
  EXPECT_EQ(classify_bot_comment("Tests failed on HIVE-1234"), BuildStatus::Failure);
  EXPECT_EQ(classify_bot_comment("Applies to HIVE-1234 cleanly"), std::nullopt);
  EXPECT_EQ(classify_bot_comment("BUILD SUCCESS"), BuildStatus::Success);
  EXPECT_EQ(classify_bot_comment("nothing here"), std::nullopt);
}

TEST(CiEvents, ExtractsQualifiedClasses) {
  const auto classes = extract_failed_classes(
      "Failed tests:\norg.apache.hive.TestAlpha\norg.apache.hive.TestAlpha\n"
      "org.apache.hive.ql.QueryTest\njava.lang.NullPointerException\nTestBare\n");
  const std::set<std::string> expect{"java.lang.NullPointerException", "org.apache.hive.TestAlpha",
                                     "org.apache.hive.ql.QueryTest"};
  EXPECT_EQ(classes, expect);
}

IssueReport timeline() {
  IssueReport r = issue("HIVE-42", "2016-01-23T00:00:00Z");
  Comment up = comment("dev", "2016-01-23T04:00:00Z", "patch v1");
  up.attachments.push_back(patch("HIVE-42.1.patch", "2016-01-23T04:00:00Z"));
  up.attachments.push_back(patch("notes.txt", "2016-01-23T04:10:00Z"));
  r.comments.push_back(up);
  r.comments.push_back(comment("Hive QA", "2016-01-23T04:50:00Z", "-1 overall\norg.a.TestX"));
  r.comments.push_back(comment("dev", "2016-01-23T23:50:00Z", "unrelated failure"));
  r.comments.push_back(comment("Hive QA", "2016-01-24T02:00:00Z", "+1 overall"));
  r.comments.push_back(comment("Hive QA", "2016-01-24T03:00:00Z", "garbled"));
  return r;
}

TEST(CiEvents, EventsInTimelineOrderWithTriggeringPatch) {
  const auto events = extract_build_events(timeline(), "Hive QA");
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].comment_index, 1u);
  EXPECT_EQ(events[0].status, BuildStatus::Failure);
  ASSERT_TRUE(events[0].triggering_patch.has_value());
  EXPECT_EQ(events[0].triggering_patch->filename, "HIVE-42.1.patch");
  EXPECT_EQ(events[0].failed_classes, std::set<std::string>{"org.a.TestX"});
  EXPECT_EQ(events[1].status, BuildStatus::Success);
  EXPECT_EQ(events[2].status, BuildStatus::Failure);
  EXPECT_TRUE(events[2].parse_warning);
  EXPECT_FALSE(events[0].parse_warning);
}

TEST(CiEvents, PatchAtSameInstantIsNotTriggering) {
  IssueReport r = issue("HIVE-43", "2016-01-23T00:00:00Z");
  Comment c = comment("Hive QA", "2016-01-23T04:50:00Z", "-1 overall");
  c.attachments.push_back(patch("HIVE-43.1.patch", "2016-01-23T04:50:00Z"));
  r.comments.push_back(c);
  const auto events = extract_build_events(r, "Hive QA");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_FALSE(events[0].triggering_patch.has_value());
}

TEST(CiEvents, ExtractionIsIdempotent) {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  for (const auto& issue : c.issues) {
    const auto a = extract_build_events(issue, "Hive QA");
    const auto b = extract_build_events(issue, "Hive QA");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].comment_index, b[i].comment_index);
      EXPECT_EQ(a[i].failed_classes, b[i].failed_classes);
    }
  }
}

TEST(CiEvents, PatchSuffixes) {
  EXPECT_TRUE(is_patch_file("HIVE-1.patch"));
  EXPECT_TRUE(is_patch_file("x.diff"));
  EXPECT_FALSE(is_patch_file("x.patch.txt"));
}

}  // namespace
