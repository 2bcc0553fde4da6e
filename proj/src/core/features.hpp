#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/corpus.hpp"
#include "core/pairgen.hpp"
#include "core/similarity.hpp"

namespace authdrift {

struct FeatureConfig {
  int n = 2;
  std::size_t max_size = 50000;

  void Validate() const;
};

// Character n-grams ranked by total occurrence count, ties broken by code
// point order. Index = rank.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(int n, std::vector<std::u32string> ngrams, std::vector<std::uint64_t> counts);

  int n() const { return n_; }
  std::size_t size() const { return ngrams_.size(); }
  const std::u32string& ngram(std::size_t i) const { return ngrams_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::optional<std::uint32_t> Find(std::u32string_view ngram) const;
  std::optional<std::uint32_t> Find(std::string_view utf8_ngram) const;

 private:
  int n_ = 2;
  std::vector<std::u32string> ngrams_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::u32string, std::uint32_t> index_;
};

struct IdfTable {
  std::vector<double> weights;  // ln((1 + n_docs) / (1 + df)) + 1
  std::size_t n_docs = 0;
};

struct FeatureModel {
  FeatureConfig config;
  Vocabulary vocab;
  IdfTable idf;
  // Preprocessing of the dataset the model was trained on; checked against
  // test data before verification.
  TokenizerConfig tokenizer;
  TruncationPolicy truncation;
};

// NFC, whitespace runs collapsed to one space, no case folding.
std::u32string PrepareCharStream(std::string_view text);

Vocabulary BuildVocabulary(std::span<const std::string> texts, int n, std::size_t max_size);
IdfTable BuildIdf(std::span<const std::string> texts, const Vocabulary& vocab);
FeatureModel BuildFeatureModel(std::span<const std::string> texts, const FeatureConfig& config);

// Distinct paragraphs of a dataset (both sides), keyed by document and
// paragraph index, in key order.
struct KeyedParagraph {
  std::string doc_id;
  std::uint32_t para_index = 0;
  std::string author_id;
  std::string text;
};
std::vector<KeyedParagraph> DistinctParagraphs(const PairDataset& dataset);

FeatureModel BuildFeatureModel(const PairDataset& train, const FeatureConfig& config);

// Raw count times idf, L2-normalized. Out-of-vocabulary n-grams are ignored.
SparseVector Vectorize(std::string_view text, const FeatureModel& model);

void SaveFeatureModel(const FeatureModel& model, const std::filesystem::path& path);
FeatureModel LoadFeatureModel(const std::filesystem::path& path);

}  // namespace authdrift
