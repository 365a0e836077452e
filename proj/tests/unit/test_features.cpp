#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/feature_table.hpp"
#include "ubf/features.hpp"
#include "ubf/io.hpp"

namespace {

using namespace ubf;
using namespace ubf::test;

FeatureTable fixture_table() {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  return make_feature_table(extract_corpus_features(c, label_corpus(c)));
}

TEST(Features, MatchesIndependentOracleCellByCell) {
  const FeatureTable got = fixture_table();
  const CsvDocument want = parse_csv(read_text_file(fixture("expected_features.csv")));
  ASSERT_EQ(want.records.size(), got.rows());
  ASSERT_EQ(want.header.size(), 3 + kFeatureCount + 1);
  for (std::size_t j = 0; j < kFeatureCount; ++j) EXPECT_EQ(want.header[3 + j], feature_names()[j]);
  for (std::size_t i = 0; i < got.rows(); ++i) {
    const auto& rec = want.records[i];
    EXPECT_EQ(rec[0], got.issue_ids[i]);
    EXPECT_EQ(std::stoul(rec[1]), got.event_indices[i]);
    EXPECT_EQ(std::stoi(rec[2]), got.heuristic_flag[i]) << rec[0];
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      EXPECT_EQ(parse_number(rec[3 + j], "cell"), got.x(i, j))
          << rec[0] << "@" << rec[1] << " " << feature_names()[j];
    }
    EXPECT_EQ(std::stoi(rec.back()), (*got.hpem_match)[i]);
  }
}

TEST(Features, NamesAndOrder) {
  const auto& n = feature_names();
  EXPECT_EQ(n.size(), 33u);
  EXPECT_EQ(n.front(), "priority_ord");
  EXPECT_EQ(n.back(), "modified_source_files");
}

TEST(Features, ParallelIssuesUseUtcDay) {
  Corpus c;
  c.project = "HIVE";
  c.issues.push_back(issue("A", "2016-01-04T23:59:00Z"));
  c.issues.push_back(issue("B", "2016-01-04T00:00:00Z"));
  c.issues.push_back(issue("C", "2016-01-05T00:01:00Z"));
  EXPECT_EQ(count_parallel_issues(c.issues[0], c), 1u);
  EXPECT_EQ(count_parallel_issues(c.issues[2], c), 0u);
}

BuildEvent failure(std::set<std::string> classes) {
  BuildEvent e;
  e.status = BuildStatus::Failure;
  e.failed_classes = std::move(classes);
  return e;
}

TEST(Features, SimilarFailuresAndSharedMessage) {
  std::vector<BuildEvent> prior{failure({"A"}), failure({"B"}), failure({"A", "C"})};
  BuildEvent ok;
  ok.status = BuildStatus::Success;
  ok.failed_classes = {"A", "C"};
  prior.push_back(ok);
  const BuildEvent cur = failure({"A", "C"});
  EXPECT_EQ(count_similar_failures(cur, prior), 2u);
  EXPECT_EQ(count_similar_failures(cur, prior, SimilarFailuresMode::Sum), 3u);
  EXPECT_TRUE(shares_same_emsg(cur, prior));
  EXPECT_FALSE(shares_same_emsg(failure({"A", "D"}), prior));
  EXPECT_FALSE(shares_same_emsg(failure({}), prior));
  EXPECT_TRUE(hpem_matches(cur, prior));
  EXPECT_FALSE(hpem_matches(failure({"A"}), prior));
  EXPECT_FALSE(hpem_matches(cur, {}));
}

TEST(Features, Latency) {
  BuildEvent e = failure({});
  e.posted_at = at("2016-01-01T02:00:00Z");
  EXPECT_FALSE(compute_ci_latency(e).has_value());
  e.triggering_patch = patch("x.patch", "2016-01-01T00:00:00Z");
  EXPECT_EQ(compute_ci_latency(e), 2.0);
  e.triggering_patch = patch("x.patch", "2016-01-01T03:00:00Z");
  EXPECT_THROW(compute_ci_latency(e), NegativeLatency);
}

TEST(Features, PatchCounters) {
  Attachment a = patch("x.patch", "2016-01-01T00:00:00Z");
  a.line_stats = PatchLineStats{{"src/A.java", {3, 1, 2}},
                                {"src/B.java", {0, 0, 0}},
                                {"conf/a.xml", {5, 0, 1}},
                                {"conf/b.yaml", {2, 2, 0}},
                                {"README.md", {9, 9, 9}}};
  const PushFeatures p = extract_patch_features(a);
  EXPECT_TRUE(p.has_config_files);
  EXPECT_EQ(p.config_lines_added, 7);
  EXPECT_EQ(p.config_lines_deleted, 2);
  EXPECT_EQ(p.config_lines_modified, 1);
  EXPECT_TRUE(p.has_source_code);
  EXPECT_EQ(p.source_lines_added, 3);
  EXPECT_EQ(p.modified_source_files, 1);
}

TEST(Features, PriorityOrdinal) {
  EXPECT_EQ(priority_ordinal(Priority::Trivial), 1);
  EXPECT_EQ(priority_ordinal(Priority::Blocker), 5);
}

TEST(Features, FixtureRowsSatisfyInvariants) {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  for (const auto& row : extract_corpus_features(c, label_corpus(c))) {
    EXPECT_TRUE(row.features.satisfies_invariants()) << row.issue_id;
    const auto v = row.features.to_array();
    for (double x : v) EXPECT_GE(x, 0.0);
  }
}

TEST(FeatureTable, CsvRoundTrip) {
  const FeatureTable t = fixture_table();
  const FeatureTable back = read_feature_csv(write_feature_csv(t));
  EXPECT_EQ(back.issue_ids, t.issue_ids);
  EXPECT_EQ(back.event_indices, t.event_indices);
  EXPECT_EQ(back.feature_names, t.feature_names);
  EXPECT_EQ(back.x, t.x);
  EXPECT_EQ(back.heuristic_flag, t.heuristic_flag);
  EXPECT_EQ(back.hpem_match, t.hpem_match);
  EXPECT_EQ(write_feature_csv(back), write_feature_csv(t));
}

TEST(FeatureTable, SelectsNamedColumns) {
  const FeatureTable t = fixture_table();
  const std::vector<std::string> keep{"ci_latency_hours", "priority_ord"};
  const FeatureTable s = t.with_features(keep);
  EXPECT_EQ(s.feature_names, keep);
  EXPECT_EQ(s.x.column(1), t.x.column(*t.feature_index("priority_ord")));
  const std::vector<std::string> bad{"nope"};
  EXPECT_THROW(t.with_features(bad), FeatureMismatch);
}

}  // namespace
