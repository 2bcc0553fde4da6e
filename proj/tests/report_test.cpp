#include "core/report.hpp"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace authdrift {
namespace {

std::vector<EvaluatedSample> Perfect(std::size_t run) {
  std::vector<EvaluatedSample> out;
  const Category cats[] = {Category::kSameDoc, Category::kSameAuthNear, Category::kSameAuthFar,
                           Category::kDiffAuthNear, Category::kDiffAuthFar};
  const int years[] = {1900, 1904, 1931, 1907, 1960};
  for (int i = 0; i < 10; ++i) {
    EvaluatedSample s;
    s.run = run;
    s.category = cats[i % 5];
    s.result.sample_id = "test-" + std::to_string(i);
    s.result.truth = IsSameAuthor(s.category) ? 1 : 0;
    s.result.label = s.result.truth;
    s.result.confidence = 0.6 + 0.03 * i;
    s.result.score = s.result.label ? s.result.confidence : 1 - s.result.confidence;
    s.year1 = 1900;
    s.year2 = years[i % 5] + i / 5;
    s.author1 = "A";
    s.author2 = s.result.truth ? "A" : "B";
    out.push_back(s);
  }
  return out;
}

TEST(FormatNumberTest, RoundTrips) {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 0.8181818181818182, 1e-300, 123456.789}) {
    EXPECT_EQ(std::stod(FormatNumber(v)), v);
  }
}

TEST(ReportTest, AllCorrectGivesUnitScores) {
  const auto report = BuildReport({{"test", Perfect(0), {}}}, ReportOptions{});
  ASSERT_EQ(report.prf.size(), 4u);  // two classes for the set and for OVERALL
  for (const auto& row : report.prf) {
    EXPECT_EQ(row.prf.precision, 1.0);
    EXPECT_EQ(row.prf.recall, 1.0);
    EXPECT_EQ(row.prf.f1, 1.0);
  }
  EXPECT_EQ(report.prf.back().test_set, kOverallName);
  for (const auto& row : report.categories) EXPECT_EQ(row.stat.accuracy, 1.0);
  // All buckets equally accurate: the correlations are undefined.
  for (const auto& row : report.correlations) EXPECT_FALSE(row.stat.has_value());
  EXPECT_TRUE(report.mcnemar.empty());
}

TEST(ReportTest, OverallPoolsSets) {
  auto a = Perfect(0);
  auto b = Perfect(0);
  b[0].result.label = 0;
  const auto report = BuildReport({{"x", a, {}}, {"y", b, {}}}, ReportOptions{});
  const auto& overall = report.prf[4];
  EXPECT_EQ(overall.test_set, kOverallName);
  EXPECT_EQ(overall.cm.total(), 20u);
  EXPECT_EQ(overall.cm.fn, 1u);
}

TEST(ReportTest, CsvFilesRoundTrip) {
  testing::TempDir dir;
  auto b = Perfect(0);
  for (int i = 0; i < 4; ++i) b[i].result.label = 1 - b[i].result.label;
  auto a = Perfect(0);
  a[9].result.label = 1 - a[9].result.label;
  const auto report = BuildReport({{"test", a, b}}, ReportOptions{});
  WriteReport(report, dir.path());
  for (const char* f : {"prf.csv", "by_category.csv", "by_distance.csv", "correlations.csv", "summary.txt",
                        "mcnemar.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto prf = ReadCsv(dir / "prf.csv");
  ASSERT_EQ(prf.size(), 1 + report.prf.size());
  EXPECT_EQ(prf[0][0], "test_set");
  for (std::size_t i = 0; i < report.prf.size(); ++i) {
    EXPECT_EQ(prf[i + 1][0], report.prf[i].test_set);
    EXPECT_EQ(std::stod(prf[i + 1][4]), report.prf[i].prf.f1);
    EXPECT_EQ(std::stoull(prf[i + 1][5]), report.prf[i].cm.tp);
  }
  const auto dist = ReadCsv(dir / "by_distance.csv");
  ASSERT_EQ(dist.size(), 1 + report.distances.size());
  ASSERT_EQ(report.mcnemar.size(), 2u);
  EXPECT_EQ(report.mcnemar[0].result.b, 4u);
  EXPECT_EQ(report.mcnemar[0].result.c, 1u);
}

TEST(ReadCsvTest, QuotedFields) {
  testing::TempDir dir;
  testing::WriteText(dir / "x.csv", "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
  const auto rows = ReadCsv(dir / "x.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], "x,y");
  EXPECT_EQ(rows[1][1], "say \"hi\"");
}

}  // namespace
}  // namespace authdrift
