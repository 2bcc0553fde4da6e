#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/corpus.hpp"

namespace authdrift {

// Synthetic corpus: each author writes from a first-order Markov model over a
// small kana alphabet. Every author has an early and a late era; "shifted"
// authors move part of their transition signature to a fresh one in the late
// era.
struct SynthConfig {
  std::size_t authors = 20;
  std::size_t docs_per_era = 2;
  std::size_t paragraphs_per_doc = 12;
  std::size_t min_paragraph_chars = 220;
  std::size_t max_paragraph_chars = 320;
  std::size_t alphabet_size = 48;  // kana symbols, always including 、 and 。
  int first_year = 1900;
  int era_gap = 25;
  double shifted_fraction = 0.5;
  double signature = 1.0;  // spread of author-specific transition log-weights
  double shift = 0.7;      // share of a fresh signature in a shifted author's late era
  std::uint64_t seed = 7;

  void Validate() const;
};

struct SynthAuthor {
  std::string author_id;
  bool shifted = false;
};

struct SynthCorpus {
  std::vector<Document> documents;
  std::vector<SynthAuthor> authors;
};

SynthCorpus GenerateSynthetic(const SynthConfig& config);

// Writes manifest.jsonl, texts/<doc_id>.txt and authors.json under `dir`.
// Returns the manifest path.
std::filesystem::path WriteSynthetic(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace authdrift
