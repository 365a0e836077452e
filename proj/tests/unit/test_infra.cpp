#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/io.hpp"
#include "ubf/matrix.hpp"
#include "ubf/parallel.hpp"
#include "ubf/random.hpp"
#include "ubf/stats.hpp"
#include "ubf/timestamp.hpp"

namespace {

using namespace ubf;

TEST(Random, DeriveSeedIsDeterministicAndSpreads) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(7, 4));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

TEST(Random, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Random, UniformAndIndexStayInRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.index(7), 7u);
  }
}

TEST(Random, NormalMoments) {
  Rng r(3);
  std::vector<double> v(200000);
  for (double& x : v) x = r.normal();
  EXPECT_NEAR(mean(v), 0.0, 0.01);
  EXPECT_NEAR(sample_stddev(v), 1.0, 0.01);
}

TEST(Random, ShuffleIsPermutation) {
  Rng r(5);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  r.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Stats, MedianMeanStddev) {
  const std::vector<double> odd{5, 1, 3};
  const std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(median(odd), 3.0);
  EXPECT_EQ(median(even), 2.5);
  EXPECT_EQ(median(std::vector<double>{}), 0.0);
  EXPECT_EQ(mean(even), 2.5);
  // sum of squared deviations 5, n - 1 = 3
  EXPECT_NEAR(sample_stddev(even), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(sample_stddev(std::vector<double>{1.0}), 0.0);
}

TEST(Stats, AverageRanksWithTies) {
  const std::vector<double> v{10, 20, 10, 30, 20, 20};
  const std::vector<double> expect{1.5, 4, 1.5, 6, 4, 4};
  EXPECT_EQ(average_ranks(v), expect);
}

TEST(Stats, PearsonKnownValues) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 4, 6, 8};
  const std::vector<double> z{4, 3, 2, 1};
  const std::vector<double> k{3, 3, 3, 3};
  EXPECT_NEAR(pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, z), -1.0, 1e-15);
  EXPECT_EQ(pearson(x, k), 0.0);
}

// Brute-force pair counting as the reference for the rank-based AUC.
double auc_by_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Stats, RocAucMatchesPairCounting) {
  Rng r(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + r.index(60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(r.index(6));  // plenty of ties
      y[i] = r.bernoulli(0.4) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(roc_auc(s, y), auc_by_pairs(s, y), 1e-12);
  }
}

TEST(Stats, RocAucSingleClassIsHalf) {
  const std::vector<double> s{0.1, 0.9};
  const std::vector<int> y{1, 1};
  EXPECT_EQ(roc_auc(s, y), 0.5);
}

TEST(Matrix, RowsColumnsAndStacking) {
  Matrix m = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 2u);
  EXPECT_EQ(m.column(1), (std::vector<double>{2, 4, 6}));
  const std::vector<std::size_t> idx{2, 0};
  EXPECT_EQ(m.select_rows(idx), Matrix::from_rows({{5, 6}, {1, 2}}));
  const std::vector<std::size_t> col{1};
  EXPECT_EQ(m.select_columns(col), Matrix::from_rows({{2}, {4}, {6}}));
  const Matrix s = Matrix::vstack(m, Matrix::from_rows({{7, 8}}));
  EXPECT_EQ(s.rows(), 4u);
  EXPECT_EQ(s(3, 1), 8.0);
  Matrix e;
  const std::vector<double> row{1, 2, 3};
  e.append_row(row);
  EXPECT_EQ(e.cols(), 3u);
}

TEST(Csv, QuotingRoundTrip) {
  const std::vector<std::string> fields{"plain", "a,b", "say \"hi\"", " padded", ""};
  EXPECT_EQ(split_csv_line(join_csv(fields)), fields);
}

TEST(Csv, DocumentSeparatesComments) {
  const CsvDocument d = parse_csv("#schema=x\na,b\n1,2\n\n3,4\n");
  EXPECT_EQ(d.comments, (std::vector<std::string>{"schema=x"}));
  EXPECT_EQ(d.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(d.records.size(), 2u);
  EXPECT_EQ(d.records[1][0], "3");
}

TEST(Csv, ParseNumberRejectsGarbage) {
  EXPECT_EQ(parse_number("2.5", "x"), 2.5);
  EXPECT_THROW(parse_number("2.5abc", "x"), ParseError);
  EXPECT_THROW(parse_number("", "x"), ParseError);
}

TEST(Io, FormatDoubleRoundTrips) {
  Rng r(9);
  for (int i = 0; i < 2000; ++i) {
    const double v = (r.uniform() - 0.5) * std::pow(10.0, static_cast<double>(r.index(20)) - 10);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.25), "0.25");
  EXPECT_EQ(format_double(3.0), "3");
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "ubf_io_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "out.txt";
  write_file_atomic(file, "first");
  write_file_atomic(file, "second");
  EXPECT_EQ(read_text_file(file), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  std::filesystem::remove_all(dir);
}

TEST(Io, MissingFileIsDataError) {
  EXPECT_THROW(read_text_file("/nonexistent/ubf/file"), DataError);
}

TEST(Timestamp, ParsesZonesAndFractions) {
  const Timestamp z = parse_timestamp("2016-01-23T04:50:00Z");
  EXPECT_EQ(format_timestamp(z), "2016-01-23T04:50:00Z");
  EXPECT_EQ(parse_timestamp("2016-01-23T06:50:00.123+0200"), z);
  EXPECT_EQ(parse_timestamp("2016-01-23 04:50:00"), z);
  EXPECT_THROW(parse_timestamp("23/01/2016"), ParseError);
}

TEST(Timestamp, HoursAndDates) {
  const Timestamp a = parse_timestamp("2016-01-23T23:30:00Z");
  const Timestamp b = parse_timestamp("2016-01-24T01:00:00Z");
  EXPECT_EQ(hours_between(a, b), 1.5);
  EXPECT_EQ(hours_between(b, a), -1.5);
  EXPECT_NE(utc_date(a), utc_date(b));
}

TEST(Parallel, CoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(Parallel, NestedCallsComplete) {
  std::vector<int> hits(100, 0);
  parallel_for(10, [&](std::size_t i) {
    parallel_for(10, [&](std::size_t j) { hits[i * 10 + j] = 1; });
  });
  EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 100);
}

TEST(Parallel, RethrowsBodyException) {
  set_max_threads(2);
  EXPECT_THROW(parallel_for(20,
                            [](std::size_t i) {
                              if (i == 13) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  set_max_threads(0);
}

}  // namespace
