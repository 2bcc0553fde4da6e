#include "core/synth.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "test_support.hpp"

namespace authdrift {
namespace {

SynthConfig Small() {
  SynthConfig c;
  c.authors = 6;
  c.paragraphs_per_doc = 4;
  return c;
}

TEST(SynthTest, ShapeAndDeterminism) {
  const auto c = Small();
  const auto a = GenerateSynthetic(c);
  const auto b = GenerateSynthetic(c);
  ASSERT_EQ(a.documents.size(), c.authors * 2 * c.docs_per_era);
  ASSERT_EQ(a.authors.size(), c.authors);
  std::size_t shifted = 0;
  for (const auto& author : a.authors) shifted += author.shifted ? 1 : 0;
  EXPECT_EQ(shifted, 3u);
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    EXPECT_EQ(a.documents[i].text, b.documents[i].text);
    EXPECT_EQ(a.documents[i].year, b.documents[i].year);
  }
  auto other = c;
  other.seed = 8;
  EXPECT_NE(GenerateSynthetic(other).documents[0].text, a.documents[0].text);
}

TEST(SynthTest, ParagraphsAreAdmissibleAndErasApart) {
  const auto c = Small();
  const auto corpus = GenerateSynthetic(c);
  const auto segmented = testing::IngestChars(corpus.documents);
  std::size_t paragraphs = 0;
  for (const auto& d : segmented.documents) paragraphs += d.paragraphs.size();
  EXPECT_EQ(paragraphs, corpus.documents.size() * c.paragraphs_per_doc);
  for (const auto& author : corpus.authors) {
    int last_early = 0;
    int first_late = 1 << 30;
    for (const auto& d : corpus.documents) {
      if (d.author_id != author.author_id) continue;
      if (d.doc_id.find("-early-") != std::string::npos) {
        last_early = std::max(last_early, d.year);
      } else {
        first_late = std::min(first_late, d.year);
      }
    }
    EXPECT_GT(first_late - last_early, 10) << author.author_id;
  }
}

TEST(SynthTest, WritesLoadableManifest) {
  testing::TempDir dir;
  const auto corpus = GenerateSynthetic(Small());
  const auto manifest = WriteSynthetic(corpus, dir.path());
  const auto docs = LoadManifest(manifest);
  ASSERT_EQ(docs.size(), corpus.documents.size());
  EXPECT_EQ(docs[0].text, corpus.documents[0].text);
  EXPECT_TRUE(std::filesystem::exists(dir / "authors.json"));
}

TEST(SynthTest, SmallerAlphabetKeepsPunctuation) {
  auto c = Small();
  c.alphabet_size = 6;
  const auto corpus = GenerateSynthetic(c);
  std::set<std::string> symbols;
  const auto segmented = testing::IngestChars(corpus.documents);
  for (const auto& d : segmented.documents) {
    for (const auto& p : d.paragraphs) {
      for (std::size_t i = 0; i < p.text.size(); i += 3) symbols.insert(p.text.substr(i, 3));
    }
  }
  EXPECT_LE(symbols.size(), 6u);
  EXPECT_TRUE(symbols.count("。"));
}

TEST(SynthTest, RejectsBadConfig) {
  auto c = Small();
  c.authors = 0;
  EXPECT_THROW(c.Validate(), Error);
  c = Small();
  c.min_paragraph_chars = 400;
  EXPECT_THROW(c.Validate(), Error);
  c = Small();
  c.alphabet_size = 60;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace authdrift
