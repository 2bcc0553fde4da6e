#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/pairgen.hpp"
#include "core/results.hpp"

namespace authdrift {

// Counts with class 1 as the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix Tally(std::span<const VerificationResult> results);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// positive_class 0 scores the negative class (roles of tp/tn and fp/fn
// swap). Zero denominators give 0.
Prf ComputePrf(const ConfusionMatrix& cm, int positive_class);

// A result joined with the metadata of the sample it answers.
struct EvaluatedSample {
  VerificationResult result;
  std::size_t run = 0;
  Category category = Category::kSameDoc;
  std::string author1;
  std::string author2;
  int year1 = 0;
  int year2 = 0;

  int Delta() const { return year1 > year2 ? year1 - year2 : year2 - year1; }
  bool Correct() const { return result.label == result.truth; }
};

// Every sample must have exactly one result and vice versa; result truth
// must agree with the dataset label.
std::vector<EvaluatedSample> JoinResults(const std::vector<VerificationResult>& results,
                                         const PairDataset& dataset, std::size_t run = 0);

std::vector<VerificationResult> ResultsOf(std::span<const EvaluatedSample> samples);

// Concatenation of runs over one dataset; the pooled confusion matrix is the
// sum of the per-run ones. Throws if the runs cover different sample ids.
std::vector<EvaluatedSample> PoolRuns(const std::vector<std::vector<EvaluatedSample>>& runs);

// Per-sample majority label across runs (ties go to 0); confidence is the
// winning vote share, score the share of votes for 1.
std::vector<EvaluatedSample> MajorityVote(const std::vector<std::vector<EvaluatedSample>>& runs);

struct CategoryStat {
  Category category = Category::kSameDoc;
  std::size_t n = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

std::vector<CategoryStat> ByCategory(std::span<const EvaluatedSample> samples);

enum class Polarity { kSameAuthor, kDifferentAuthor };
std::string_view ToString(Polarity p);

struct DistanceBucket {
  int delta = 0;  // lower edge of the bucket in years
  std::size_t n = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

// Cross-document samples of the given polarity grouped by |year1 - year2|
// (floored to multiples of bucket_width). Same-document pairs are skipped.
std::vector<DistanceBucket> ByDistance(std::span<const EvaluatedSample> samples, Polarity polarity,
                                       int bucket_width = 1);

struct CorrelationStat {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Product-moment r with a two-tailed t-test p-value (n - 2 dof). Throws
// Error(kUndefined) when n < 3 or either series has zero variance.
CorrelationStat Pearson(std::span<const double> xs, std::span<const double> ys);

enum class McNemarMethod { kAuto, kChiSquare, kExact };
std::string_view ToString(McNemarMethod m);
McNemarMethod ParseMcNemarMethod(std::string_view name);

inline constexpr std::uint64_t kMcNemarExactBelow = 25;

struct McNemarResult {
  std::uint64_t b = 0;  // A right, B wrong
  std::uint64_t c = 0;  // A wrong, B right
  double statistic = 0.0;  // continuity-corrected chi-square
  double p = 1.0;
  McNemarMethod method = McNemarMethod::kChiSquare;  // branch that produced p
};

// kAuto: chi-square when b + c >= 25, exact binomial otherwise.
McNemarResult McNemarFromCounts(std::uint64_t b, std::uint64_t c,
                                McNemarMethod method = McNemarMethod::kAuto);

// Pairs decisions by (run, sample_id); both lists must cover the same keys.
McNemarResult McNemar(std::span<const EvaluatedSample> a, std::span<const EvaluatedSample> b,
                      McNemarMethod method = McNemarMethod::kAuto);

}  // namespace authdrift
