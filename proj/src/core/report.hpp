#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/eval.hpp"

namespace authdrift {

// Decisions of one or two classifiers on one named test set, already pooled.
struct TestSetResults {
  std::string name;
  std::vector<EvaluatedSample> samples;
  std::vector<EvaluatedSample> samples_b;  // empty unless comparing
};

struct ReportOptions {
  int bucket_width = 1;
  McNemarMethod mcnemar = McNemarMethod::kAuto;
};

inline constexpr const char* kOverallName = "OVERALL";

struct PrfRow {
  std::string test_set;
  int cls = 1;
  ConfusionMatrix cm;
  Prf prf;
};

struct CategoryRow {
  std::string test_set;
  CategoryStat stat;
};

struct DistanceRow {
  std::string test_set;
  Polarity polarity = Polarity::kSameAuthor;
  DistanceBucket bucket;
};

struct CorrelationRow {
  std::string test_set;
  Polarity polarity = Polarity::kSameAuthor;
  std::string measure;  // "r1_distance_accuracy" or "r2_confidence_accuracy"
  std::optional<CorrelationStat> stat;  // empty: undefined
  std::size_t points = 0;
};

struct McNemarRow {
  std::string test_set;
  McNemarResult result;
};

struct EvalReport {
  std::vector<PrfRow> prf;
  std::vector<CategoryRow> categories;
  std::vector<DistanceRow> distances;
  std::vector<CorrelationRow> correlations;
  std::vector<McNemarRow> mcnemar;
};

// Rows per test set in input order, then an OVERALL block over all of them.
EvalReport BuildReport(const std::vector<TestSetResults>& sets, const ReportOptions& options);

// prf.csv, by_category.csv, by_distance.csv, correlations.csv, summary.txt,
// and mcnemar.txt when a second classifier was supplied.
void WriteReport(const EvalReport& report, const std::filesystem::path& dir);

// Shortest text that parses back to the same double.
std::string FormatNumber(double value);

// Minimal CSV reader for the files above (quoted fields supported).
std::vector<std::vector<std::string>> ReadCsv(const std::filesystem::path& path);

}  // namespace authdrift
