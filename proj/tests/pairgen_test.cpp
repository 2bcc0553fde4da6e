#include "core/pairgen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "test_support.hpp"

namespace authdrift {
namespace {

using testing::MakeDocument;
using testing::TempDir;

Category Categorize(const char* a1, int y1, const char* d1, const char* a2, int y2, const char* d2) {
  return CategorizePair({a1, y1, d1}, {a2, y2, d2}, kDefaultHorizon);
}

TEST(CategorizeTest, ReferenceExamples) {
  EXPECT_EQ(Categorize("A", 1931, "d1", "A", 1931, "d1"), Category::kSameDoc);
  EXPECT_EQ(Categorize("A", 1940, "d1", "A", 1953, "d2"), Category::kSameAuthFar);
  EXPECT_EQ(Categorize("A", 1931, "d1", "B", 1940, "d2"), Category::kDiffAuthNear);
  EXPECT_EQ(Categorize("A", 1931, "d1", "B", 1942, "d2"), Category::kDiffAuthFar);
}

TEST(CategorizeTest, HorizonBoundaryIsNear) {
  EXPECT_EQ(Categorize("A", 1930, "d1", "A", 1940, "d2"), Category::kSameAuthNear);
  EXPECT_EQ(Categorize("A", 1930, "d1", "A", 1941, "d2"), Category::kSameAuthFar);
  EXPECT_EQ(Categorize("A", 1940, "d1", "B", 1930, "d2"), Category::kDiffAuthNear);
}

TEST(CategorizeTest, SameDocumentDifferentAuthorsIsCorrupt) {
  try {
    Categorize("A", 1931, "d1", "B", 1931, "d1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConstraint);
  }
}

TEST(CategoryTest, NamesRoundTrip) {
  for (auto c : kCategories) EXPECT_EQ(ParseCategory(ToString(c)), c);
  EXPECT_THROW(ParseCategory("SAME_AUTHOR"), Error);
}

SegmentedCorpus GroupingCorpus() {
  std::vector<Document> docs = {
      MakeDocument("s1", "single", 1931, {210}, 1),
      MakeDocument("n1", "near", 1931, {210}, 2),
      MakeDocument("n2", "near", 1940, {210}, 3),
      MakeDocument("f1", "far", 1931, {210}, 4),
      MakeDocument("f2", "far", 1953, {210}, 5),
      MakeDocument("e1", "edge", 1930, {210}, 6),
      MakeDocument("e2", "edge", 1940, {210}, 7),
      // Second document has no admissible paragraph, so this author counts as single.
      MakeDocument("h1", "short", 1900, {210}, 8),
      MakeDocument("h2", "short", 1950, {20}, 9),
      MakeDocument("z1", "empty", 1900, {20}, 10),
  };
  return testing::IngestChars(docs);
}

TEST(GroupAuthorsTest, PartitionBySpan) {
  const auto g = GroupAuthors(GroupingCorpus(), kDefaultHorizon);
  EXPECT_EQ(g.single_document, (std::vector<std::string>{"short", "single"}));
  EXPECT_EQ(g.within_horizon, (std::vector<std::string>{"edge", "near"}));
  EXPECT_EQ(g.beyond_horizon, (std::vector<std::string>{"far"}));
}

TEST(GroupAuthorsTest, ExcludedAuthorsLeftOut) {
  const auto g = GroupAuthors(GroupingCorpus(), kDefaultHorizon, {"far", "single"});
  EXPECT_EQ(g.single_document, (std::vector<std::string>{"short"}));
  EXPECT_TRUE(g.beyond_horizon.empty());
}

TEST(GroupAuthorsTest, PartitionPropertyOnRandomCorpora) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Document> docs;
    std::map<std::string, std::vector<int>> years;
    const int authors = 2 + static_cast<int>(rng.Below(10));
    for (int a = 0; a < authors; ++a) {
      const int n = 1 + static_cast<int>(rng.Below(4));
      for (int d = 0; d < n; ++d) {
        const std::string author = "a" + std::to_string(a);
        const int year = 1900 + static_cast<int>(rng.Below(40));
        docs.push_back(MakeDocument(author + "-" + std::to_string(d), author, year, {200}, rng.Next()));
        years[author].push_back(year);
      }
    }
    const auto g = GroupAuthors(testing::IngestChars(docs), kDefaultHorizon);
    std::set<std::string> seen;
    auto check = [&](const std::vector<std::string>& members, int kind) {
      for (const auto& m : members) {
        EXPECT_TRUE(seen.insert(m).second) << m;
        const auto& ys = years[m];
        const int span = *std::max_element(ys.begin(), ys.end()) - *std::min_element(ys.begin(), ys.end());
        if (kind == 0) EXPECT_EQ(ys.size(), 1u);
        if (kind == 1) EXPECT_TRUE(ys.size() > 1 && span <= kDefaultHorizon);
        if (kind == 2) EXPECT_TRUE(ys.size() > 1 && span > kDefaultHorizon);
      }
    };
    check(g.single_document, 0);
    check(g.within_horizon, 1);
    check(g.beyond_horizon, 2);
    EXPECT_EQ(seen.size(), years.size());
  }
}

TEST(ApportionTest, ExactAndLargestRemainder) {
  EXPECT_EQ(Apportion(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(Apportion(7, {0.5, 0.25, 0.25}), (std::array<std::size_t, 3>{3, 2, 2}));
  EXPECT_EQ(Apportion(0, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{0, 0, 0}));
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.Uniform01(), b = rng.Uniform01() * (1 - a);
    const SplitRatios r{a, b, 1 - a - b};
    const std::size_t n = rng.Below(500);
    const auto parts = Apportion(n, r);
    EXPECT_EQ(parts[0] + parts[1] + parts[2], n);
    const auto ratios = r.AsArray();
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(double(parts[k]) - ratios[k] * double(n)), 1.0);
  }
}

TEST(SplitAuthorsTest, TenAuthorsEightOneOne) {
  AuthorGroups g;
  for (int i = 0; i < 10; ++i) g.beyond_horizon.push_back("a" + std::to_string(i));
  const auto s = SplitAuthors(g, {}, 5);
  EXPECT_EQ(s[Split::kTrain].size(), 8u);
  EXPECT_EQ(s[Split::kDev].size(), 1u);
  EXPECT_EQ(s[Split::kTest].size(), 1u);
  const auto again = SplitAuthors(g, {}, 5);
  EXPECT_EQ(s.members, again.members);
  const auto other = SplitAuthors(g, {}, 6);
  EXPECT_NE(s.members, other.members);
}

TEST(SplitAuthorsTest, DisjointAndCovering) {
  AuthorGroups g;
  for (int i = 0; i < 7; ++i) g.single_document.push_back("s" + std::to_string(i));
  for (int i = 0; i < 13; ++i) g.within_horizon.push_back("n" + std::to_string(i));
  for (int i = 0; i < 5; ++i) g.beyond_horizon.push_back("f" + std::to_string(i));
  const auto s = SplitAuthors(g, {0.6, 0.2, 0.2}, 1);
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& m : s.members) {
    total += m.size();
    all.insert(m.begin(), m.end());
  }
  EXPECT_EQ(total, 25u);
  EXPECT_EQ(all.size(), 25u);
}

TEST(SplitAuthorsTest, SmallGroupGoesToTrainWithWarning) {
  AuthorGroups g;
  g.single_document = {"x", "y"};
  for (int i = 0; i < 10; ++i) g.beyond_horizon.push_back("a" + std::to_string(i));
  const auto s = SplitAuthors(g, {}, 3);
  ASSERT_EQ(s.warnings.size(), 1u);
  const auto& train = s[Split::kTrain];
  EXPECT_NE(std::find(train.begin(), train.end(), "x"), train.end());
  EXPECT_NE(std::find(train.begin(), train.end(), "y"), train.end());
}

TEST(SplitAuthorsTest, ReferenceScaleAuthorCounts) {
  // 412 authors over three groups with ratios taken from the reference
  // author counts lands within one author per group of 356/22/34.
  AuthorGroups g;
  for (int i = 0; i < 150; ++i) g.single_document.push_back("s" + std::to_string(i));
  for (int i = 0; i < 170; ++i) g.within_horizon.push_back("n" + std::to_string(i));
  for (int i = 0; i < 92; ++i) g.beyond_horizon.push_back("f" + std::to_string(i));
  const SplitRatios r{356.0 / 412, 22.0 / 412, 34.0 / 412};
  const auto s = SplitAuthors(g, r, 17);
  EXPECT_NEAR(double(s[Split::kTrain].size()), 356, 3);
  EXPECT_NEAR(double(s[Split::kDev].size()), 22, 3);
  EXPECT_NEAR(double(s[Split::kTest].size()), 34, 3);
}

TEST(SplitRatiosTest, Validation) {
  EXPECT_THROW((SplitRatios{0.5, 0.5, 0.5}.Validate()), Error);
  EXPECT_THROW((SplitRatios{1.2, -0.1, -0.1}.Validate()), Error);
  EXPECT_NO_THROW((SplitRatios{0.5, 0.0, 0.5}.Validate()));
}

TEST(QuotaSpecTest, ReferenceRows) {
  const auto q = QuotaSpec::Reference();
  EXPECT_EQ(q.sets.at("train"), (CategoryCounts{6000, 6000, 6000, 9000, 9000}));
  EXPECT_EQ(Total(q.sets.at("train")), 36000u);
  EXPECT_EQ(QuotaSpec::Reference(0.01).sets.at("test"), (CategoryCounts{6, 6, 6, 9, 9}));
}

TEST(QuotaSpecTest, JsonRoundTripAndErrors) {
  const auto spec = ParseQuotaSpec(
      R"({"horizon": 7, "include_same_doc": false,
          "sets": {"train": {"SAME_AUTH_NEAR": 3, "DIFF_AUTH_FAR": 4}}})");
  EXPECT_EQ(spec.horizon, 7);
  EXPECT_EQ(spec.sets.at("train"), (CategoryCounts{0, 3, 0, 0, 4}));
  const auto back = ParseQuotaSpec(QuotaSpecToJson(spec));
  EXPECT_EQ(back.sets, spec.sets);
  EXPECT_EQ(back.include_same_doc, false);
  EXPECT_THROW(ParseQuotaSpec(R"({"sets": {"train": {"SAME": 1}}})"), Error);
  EXPECT_THROW(ParseQuotaSpec(R"({"sets": {"holdout": {}}})"), Error);
  EXPECT_THROW(ParseQuotaSpec(R"({"include_same_doc": false, "sets": {"train": {"SAME_DOC": 1}}})"), Error);
  EXPECT_THROW(ParseQuotaSpec(R"({"sets": {"train": {"SAME_DOC": -1}}})"), Error);
}

// Two authors, two documents each, plenty of paragraphs.
SegmentedCorpus ToyCorpus() {
  std::vector<Document> docs = {
      MakeDocument("a-1", "A", 1931, {210, 220, 230}, 1), MakeDocument("a-2", "A", 1950, {210, 220, 230}, 2),
      MakeDocument("b-1", "B", 1935, {210, 220, 230}, 3), MakeDocument("b-2", "B", 1939, {210, 220, 230}, 4)};
  return testing::IngestChars(docs);
}

PairDataset Generate(const SegmentedCorpus& corpus, CategoryCounts quotas, std::vector<std::string> authors,
                     std::uint64_t seed, std::string focus = "") {
  SetRequest req{"test", quotas, std::move(authors), std::move(focus)};
  return GeneratePairs(corpus, req, kDefaultHorizon, TruncationPolicy{}, seed);
}

// Every emitted pair must be one of the admissible pairs of its category,
// found by enumerating the toy corpus exhaustively.
TEST(GeneratePairsTest, OnePerCategoryMatchesEnumeration) {
  const auto corpus = ToyCorpus();
  const auto ds = Generate(corpus, {1, 1, 1, 1, 1}, {"A", "B"}, 9);
  ASSERT_EQ(ds.samples.size(), 5u);
  std::map<std::tuple<std::string, std::uint32_t, std::string, std::uint32_t>, Category> admissible;
  for (const auto& d1 : corpus.documents) {
    for (const auto& p1 : d1.paragraphs) {
      for (const auto& d2 : corpus.documents) {
        for (const auto& p2 : d2.paragraphs) {
          if (d1.doc_id == d2.doc_id && p1.index == p2.index) continue;
          admissible[{d1.doc_id, p1.index, d2.doc_id, p2.index}] = CategorizePair(
              {d1.author_id, d1.year, d1.doc_id}, {d2.author_id, d2.year, d2.doc_id}, kDefaultHorizon);
        }
      }
    }
  }
  std::set<Category> seen;
  for (const auto& s : ds.samples) {
    auto it = admissible.find({s.doc1, s.para_index1, s.doc2, s.para_index2});
    ASSERT_NE(it, admissible.end());
    EXPECT_EQ(it->second, s.category);
    EXPECT_NO_THROW(ValidateSample(s, kDefaultHorizon));
    seen.insert(s.category);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(GeneratePairsTest, ExactQuotasNoDuplicatesAndConsistentLabels) {
  const auto corpus = testing::UniformCorpus(6, {1900, 1905, 1930}, 6, 3);
  std::vector<std::string> authors;
  for (int i = 0; i < 6; ++i) authors.push_back("a" + std::to_string(i));
  const CategoryCounts quotas{20, 25, 30, 35, 40};
  const auto ds = Generate(corpus, quotas, authors, 5);
  CategoryCounts got{};
  std::set<std::pair<std::pair<std::string, std::uint32_t>, std::pair<std::string, std::uint32_t>>> pairs;
  int positives = 0;
  for (const auto& s : ds.samples) {
    ++got[static_cast<std::size_t>(s.category)];
    ValidateSample(s, kDefaultHorizon);
    EXPECT_EQ(s.label == 1, s.author1 == s.author2);
    positives += s.label;
    auto a = std::make_pair(s.doc1, s.para_index1);
    auto b = std::make_pair(s.doc2, s.para_index2);
    if (b < a) std::swap(a, b);
    EXPECT_TRUE(pairs.insert({a, b}).second) << "duplicate pair " << s.sample_id;
    EXPECT_EQ(s.Joined(), s.para1 + " [SEP] " + s.para2);
  }
  EXPECT_EQ(got, quotas);
  EXPECT_EQ(positives, 75);
  EXPECT_EQ(ds.samples.front().sample_id, "test-000000");
}

TEST(GeneratePairsTest, DeterministicPerSeed) {
  const auto corpus = testing::UniformCorpus(4, {1900, 1905, 1930}, 5, 8);
  const std::vector<std::string> authors = {"a0", "a1", "a2", "a3"};
  TempDir dir;
  WriteDataset(Generate(corpus, {5, 5, 5, 5, 5}, authors, 42), dir / "a.jsonl");
  WriteDataset(Generate(corpus, {5, 5, 5, 5, 5}, authors, 42), dir / "b.jsonl");
  WriteDataset(Generate(corpus, {5, 5, 5, 5, 5}, authors, 43), dir / "c.jsonl");
  EXPECT_EQ(ReadFile(dir / "a.jsonl"), ReadFile(dir / "b.jsonl"));
  EXPECT_NE(ReadFile(dir / "a.jsonl"), ReadFile(dir / "c.jsonl"));
}

TEST(GeneratePairsTest, UnsatisfiableQuotaNamesCategory) {
  // All documents within ten years: no FAR pairs exist.
  const auto corpus = testing::UniformCorpus(3, {1900, 1905}, 3, 1);
  try {
    Generate(corpus, {0, 0, 1, 0, 0}, {"a0", "a1", "a2"}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("SAME_AUTH_FAR"), std::string::npos) << e.what();
  }
  // More pairs requested than exist.
  EXPECT_THROW(Generate(corpus, {1000, 0, 0, 0, 0}, {"a0"}, 1), Error);
}

TEST(GeneratePairsTest, FocusAuthorOnFirstSide) {
  const auto corpus = testing::UniformCorpus(5, {1900, 1905, 1930}, 5, 2);
  const auto ds = Generate(corpus, {4, 4, 4, 6, 6}, {"a1", "a2", "a3"}, 3, "a0");
  ASSERT_EQ(ds.samples.size(), 24u);
  EXPECT_EQ(ds.header.focus_author, "a0");
  for (const auto& s : ds.samples) {
    EXPECT_EQ(s.author1, "a0");
    if (s.label == 0) {
      EXPECT_TRUE(s.author2 == "a1" || s.author2 == "a2" || s.author2 == "a3") << s.author2;
    } else {
      EXPECT_EQ(s.author2, "a0");
    }
  }
}

TEST(GeneratePairsTest, TruncatesBothSides) {
  // The 150-character paragraph is below the admissibility floor.
  std::vector<Document> docs = {MakeDocument("a-1", "A", 1900, {600, 600}, 1),
                                MakeDocument("b-1", "B", 1901, {300, 150}, 2)};
  const auto corpus = testing::IngestChars(docs);
  const auto ds = Generate(corpus, {1, 0, 0, 2, 0}, {"A", "B"}, 1);
  ASSERT_EQ(ds.samples.size(), 3u);
  for (const auto& s : ds.samples) {
    EXPECT_LE(CountTokens(s.para1, corpus.tokenizer), 254u);
    EXPECT_LE(CountTokens(s.para2, corpus.tokenizer), 254u);
  }
}

TEST(RunPairgenTest, AuthorDisjointSetsAndFocusSets) {
  const auto corpus = testing::UniformCorpus(12, {1900, 1904, 1930}, 4, 6);
  PairgenPlan plan;
  plan.ratios = {0.5, 0.25, 0.25};
  plan.quotas.sets = {{"train", {5, 5, 5, 5, 5}}, {"dev", {2, 2, 2, 2, 2}}, {"test", {2, 2, 2, 2, 2}}};
  plan.focus_authors = {"a3"};
  plan.seed = 11;
  const auto out = RunPairgen(corpus, plan);
  ASSERT_EQ(out.datasets.size(), 4u);
  EXPECT_EQ(out.datasets[3].header.set_name, "focus-a3");
  EXPECT_EQ(out.datasets[3].header.master_seed, 11u);
  std::map<std::string, std::string> owner;
  for (int k = 0; k < 3; ++k) {
    for (const auto& s : out.datasets[k].samples) {
      for (const auto& a : {s.author1, s.author2}) {
        auto [it, inserted] = owner.emplace(a, out.datasets[k].header.set_name);
        EXPECT_EQ(it->second, out.datasets[k].header.set_name) << a;
        EXPECT_NE(a, "a3");
      }
    }
  }
  plan.focus_authors = {"nobody"};
  EXPECT_THROW(RunPairgen(corpus, plan), Error);
}

TEST(DatasetIoTest, RoundTrip) {
  const auto corpus = testing::UniformCorpus(3, {1900, 1905, 1930}, 4, 2);
  const auto ds = Generate(corpus, {3, 3, 3, 3, 3}, {"a0", "a1", "a2"}, 4);
  TempDir dir;
  WriteDataset(ds, dir / "d.jsonl");
  const auto back = ReadDataset(dir / "d.jsonl");
  EXPECT_EQ(back.header.set_name, "test");
  EXPECT_EQ(back.header.quotas, ds.header.quotas);
  EXPECT_EQ(back.header.truncation, ds.header.truncation);
  ASSERT_EQ(back.samples.size(), ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].sample_id, ds.samples[i].sample_id);
    EXPECT_EQ(back.samples[i].para2, ds.samples[i].para2);
    EXPECT_EQ(back.samples[i].category, ds.samples[i].category);
  }
  WriteDataset(back, dir / "e.jsonl");
  EXPECT_EQ(ReadFile(dir / "d.jsonl"), ReadFile(dir / "e.jsonl"));
}

}  // namespace
}  // namespace authdrift
