#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace authdrift {

enum class TokenUnit : std::uint8_t { kUnicodeChar = 0, kWhitespace = 1 };

std::string_view ToString(TokenUnit unit);
TokenUnit ParseTokenUnit(std::string_view name);

struct TokenizerConfig {
  TokenUnit unit = TokenUnit::kUnicodeChar;

  bool operator==(const TokenizerConfig&) const = default;
};

// unicode_char: number of code points. whitespace: number of maximal runs of
// non-whitespace code points.
std::size_t CountTokens(std::string_view text, const TokenizerConfig& tokenizer);

// Longest prefix holding at most `max_tokens` tokens. Never splits a code
// point; in whitespace mode the prefix ends at the end of the last kept token.
std::string_view TruncateTokens(std::string_view text, std::size_t max_tokens,
                                const TokenizerConfig& tokenizer);

struct Document {
  std::string doc_id;
  std::string author_id;
  int year = 0;
  std::string text;
};

struct Paragraph {
  std::string doc_id;
  std::uint32_t index = 0;  // position among the document's non-empty paragraphs
  std::string text;
  std::size_t token_count = 0;
};

struct TruncationPolicy {
  int max_combined = 512;
  int reserve = 3;  // separator/control positions

  int PerSideBudget() const { return (max_combined - reserve) / 2; }
  void Validate() const;
  bool operator==(const TruncationPolicy&) const = default;
};

// JSON-lines manifest; relative "path" entries resolve against the manifest's
// directory.
std::vector<Document> LoadManifest(const std::filesystem::path& path);

// Splits on newline runs (after CRLF normalization), strips each paragraph,
// drops empty ones, then keeps paragraphs with at least `min_tokens` tokens.
// Indices count all non-empty paragraphs, so filtered ones leave gaps.
std::vector<Paragraph> SegmentParagraphs(const Document& doc, const TokenizerConfig& tokenizer,
                                         std::size_t min_tokens);

// Each side is cut from the tail to PerSideBudget() tokens; a side already
// within budget is returned unchanged.
std::pair<std::string, std::string> TruncatePair(const Paragraph& first, const Paragraph& second,
                                                 const TokenizerConfig& tokenizer,
                                                 const TruncationPolicy& policy);

struct CorpusDocument {
  std::string doc_id;
  std::string author_id;
  int year = 0;
  std::size_t total_paragraphs = 0;  // before the length filter
  std::vector<Paragraph> paragraphs;  // admissible only
};

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t authors = 0;
  std::size_t paragraphs = 0;
  std::size_t admissible_paragraphs = 0;
  std::size_t admissible_documents = 0;
  std::size_t admissible_authors = 0;
};

// Corpus after segmentation and filtering; immutable once built.
struct SegmentedCorpus {
  TokenizerConfig tokenizer;
  std::size_t min_tokens = 0;
  std::vector<CorpusDocument> documents;

  IngestSummary Summarize() const;
};

SegmentedCorpus Ingest(const std::vector<Document>& documents, const TokenizerConfig& tokenizer,
                       std::size_t min_tokens);

void SaveCorpus(const SegmentedCorpus& corpus, const std::filesystem::path& path);
SegmentedCorpus LoadCorpus(const std::filesystem::path& path);

}  // namespace authdrift
