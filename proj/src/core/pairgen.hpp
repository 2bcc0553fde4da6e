#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"

namespace authdrift {

enum class Category : std::uint8_t {
  kSameDoc = 0,
  kSameAuthNear = 1,
  kSameAuthFar = 2,
  kDiffAuthNear = 3,
  kDiffAuthFar = 4,
};

inline constexpr std::array<Category, 5> kCategories = {
    Category::kSameDoc, Category::kSameAuthNear, Category::kSameAuthFar,
    Category::kDiffAuthNear, Category::kDiffAuthFar};

inline constexpr int kDefaultHorizon = 10;
inline constexpr std::string_view kSeparatorToken = "[SEP]";

std::string_view ToString(Category category);
Category ParseCategory(std::string_view name);
inline bool IsSameAuthor(Category c) { return static_cast<int>(c) <= 2; }

struct PairEndpoint {
  std::string_view author_id;
  int year = 0;
  std::string_view doc_id;
};

// |year1 - year2| == horizon counts as near. Throws on one document id with
// two different authors.
Category CategorizePair(const PairEndpoint& first, const PairEndpoint& second, int horizon);

struct AuthorGroups {
  std::vector<std::string> single_document;
  std::vector<std::string> within_horizon;  // several documents, year span <= horizon
  std::vector<std::string> beyond_horizon;  // several documents, year span > horizon
};

// Only documents with at least one admissible paragraph count; authors without
// any such document are left out. `excluded` authors are skipped.
AuthorGroups GroupAuthors(const SegmentedCorpus& corpus, int horizon,
                          const std::vector<std::string>& excluded = {});

enum class Split : std::uint8_t { kTrain = 0, kDev = 1, kTest = 2 };
std::string_view ToString(Split split);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  void Validate() const;
  std::array<double, 3> AsArray() const { return {train, dev, test}; }
};

// Largest-remainder apportionment of n items; ties go to the earlier split.
std::array<std::size_t, 3> Apportion(std::size_t n, const SplitRatios& ratios);

struct AuthorSplit {
  std::array<std::vector<std::string>, 3> members;  // indexed by Split
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  const std::vector<std::string>& operator[](Split s) const {
    return members[static_cast<std::size_t>(s)];
  }
};

// Each group is sorted, shuffled with a seed derived from `seed`, and cut by
// Apportion. A group smaller than the number of non-empty splits goes to
// train with a warning.
AuthorSplit SplitAuthors(const AuthorGroups& groups, const SplitRatios& ratios, std::uint64_t seed);

using CategoryCounts = std::array<std::size_t, 5>;

inline std::size_t Total(const CategoryCounts& c) {
  std::size_t n = 0;
  for (auto v : c) n += v;
  return n;
}

struct QuotaSpec {
  int horizon = kDefaultHorizon;
  bool include_same_doc = true;
  std::map<std::string, CategoryCounts> sets;  // "train", "dev", "test", optional "focus"

  // Data-point rows of the five-category statistics table, scaled and
  // rounded to nearest.
  static QuotaSpec Reference(double scale = 1.0);
  void Validate() const;
};

QuotaSpec ParseQuotaSpec(std::string_view json_text);
std::string QuotaSpecToJson(const QuotaSpec& spec);

struct PairSample {
  std::string sample_id;
  std::string author1;
  int year1 = 0;
  std::string doc1;
  std::uint32_t para_index1 = 0;
  std::string para1;
  std::string author2;
  int year2 = 0;
  std::string doc2;
  std::uint32_t para_index2 = 0;
  std::string para2;
  int label = 0;
  Category category = Category::kSameDoc;

  std::string Joined() const;
};

// Throws Error(kConstraint) naming the violated invariant.
void ValidateSample(const PairSample& sample, int horizon);

struct DatasetHeader {
  std::string set_name;
  std::uint64_t master_seed = 0;  // permutation seed the set was derived from
  std::uint64_t seed = 0;         // seed of this set's sampling streams
  int horizon = kDefaultHorizon;
  CategoryCounts quotas{};
  TokenizerConfig tokenizer;
  TruncationPolicy truncation;
  std::string focus_author;
};

struct PairDataset {
  DatasetHeader header;
  std::vector<PairSample> samples;
};

struct SetRequest {
  std::string name;
  CategoryCounts quotas{};
  // Authors sampled for both sides; in focus mode, the pool for the second
  // side of different-author pairs.
  std::vector<std::string> authors;
  std::string focus_author;  // empty: no focus
};

// Exact per-category counts, no duplicate unordered paragraph pairs, shuffled
// output. Deterministic in `seed`.
PairDataset GeneratePairs(const SegmentedCorpus& corpus, const SetRequest& request, int horizon,
                          const TruncationPolicy& truncation, std::uint64_t seed);

struct PairgenPlan {
  SplitRatios ratios;
  QuotaSpec quotas;
  TruncationPolicy truncation;
  std::vector<std::string> focus_authors;
  std::uint64_t seed = 17;
};

struct PairgenOutput {
  AuthorGroups groups;
  AuthorSplit split;
  std::vector<PairDataset> datasets;  // train/dev/test (as quoted) then focus-<author>
};

// Focus authors are removed before grouping; their sets pair them against the
// test split.
PairgenOutput RunPairgen(const SegmentedCorpus& corpus, const PairgenPlan& plan);

}  // namespace authdrift
