#include "core/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <json.hpp>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/unicode.hpp"

namespace authdrift {
namespace {

constexpr const char* kModelFormat = "authdrift-features/1";

template <typename Fn>
void ForEachNgram(const std::u32string& stream, int n, Fn&& fn) {
  const auto width = static_cast<std::size_t>(n);
  if (stream.size() < width) return;
  const std::u32string_view view(stream);
  for (std::size_t i = 0; i + width <= stream.size(); ++i) fn(view.substr(i, width));
}

}  // namespace

void FeatureConfig::Validate() const {
  if (n < 1) Fail(ErrorKind::kInvalidArgument, "n-gram order must be >= 1");
  if (max_size < 1) Fail(ErrorKind::kInvalidArgument, "vocabulary size must be >= 1");
}

Vocabulary::Vocabulary(int n, std::vector<std::u32string> ngrams, std::vector<std::uint64_t> counts)
    : n_(n), ngrams_(std::move(ngrams)), counts_(std::move(counts)) {
  if (counts_.size() != ngrams_.size()) {
    Fail(ErrorKind::kInvalidArgument, "vocabulary counts do not match n-grams");
  }
  index_.reserve(ngrams_.size());
  for (std::uint32_t i = 0; i < ngrams_.size(); ++i) {
    if (!index_.emplace(ngrams_[i], i).second) {
      Fail(ErrorKind::kInvalidArgument, "duplicate n-gram in vocabulary");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::Find(std::u32string_view ngram) const {
  auto it = index_.find(std::u32string(ngram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Vocabulary::Find(std::string_view utf8_ngram) const {
  return Find(unicode::Decode(utf8_ngram));
}

std::u32string PrepareCharStream(std::string_view text) {
  return unicode::Decode(unicode::CollapseWhitespace(unicode::NormalizeNfc(text)));
}

Vocabulary BuildVocabulary(std::span<const std::string> texts, int n, std::size_t max_size) {
  FeatureConfig{n, max_size}.Validate();
  std::unordered_map<std::u32string, std::uint64_t> counts;
  for (const auto& text : texts) {
    const auto stream = PrepareCharStream(text);
    ForEachNgram(stream, n, [&](std::u32string_view g) { ++counts[std::u32string(g)]; });
  }
  if (counts.empty()) {
    Fail(ErrorKind::kInvalidArgument, "training corpus yields no character n-grams");
  }
  std::vector<std::pair<std::u32string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) {
    if (l.second != r.second) return l.second > r.second;
    return l.first < r.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::u32string> ngrams;
  std::vector<std::uint64_t> freq;
  ngrams.reserve(ranked.size());
  freq.reserve(ranked.size());
  for (auto& [g, c] : ranked) {
    ngrams.push_back(std::move(g));
    freq.push_back(c);
  }
  return Vocabulary(n, std::move(ngrams), std::move(freq));
}

IdfTable BuildIdf(std::span<const std::string> texts, const Vocabulary& vocab) {
  std::vector<std::uint64_t> df(vocab.size(), 0);
  std::unordered_set<std::uint32_t> present;
  for (const auto& text : texts) {
    present.clear();
    const auto stream = PrepareCharStream(text);
    ForEachNgram(stream, vocab.n(), [&](std::u32string_view g) {
      if (auto idx = vocab.Find(g)) present.insert(*idx);
    });
    for (auto idx : present) ++df[idx];
  }
  IdfTable table;
  table.n_docs = texts.size();
  table.weights.resize(vocab.size());
  const double n = static_cast<double>(texts.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    table.weights[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return table;
}

FeatureModel BuildFeatureModel(std::span<const std::string> texts, const FeatureConfig& config) {
  config.Validate();
  if (texts.empty()) Fail(ErrorKind::kInvalidArgument, "empty training corpus");
  FeatureModel model;
  model.config = config;
  model.vocab = BuildVocabulary(texts, config.n, config.max_size);
  model.idf = BuildIdf(texts, model.vocab);
  return model;
}

std::vector<KeyedParagraph> DistinctParagraphs(const PairDataset& dataset) {
  std::map<std::pair<std::string, std::uint32_t>, KeyedParagraph> unique;
  for (const auto& s : dataset.samples) {
    unique.try_emplace({s.doc1, s.para_index1}, KeyedParagraph{s.doc1, s.para_index1, s.author1, s.para1});
    unique.try_emplace({s.doc2, s.para_index2}, KeyedParagraph{s.doc2, s.para_index2, s.author2, s.para2});
  }
  std::vector<KeyedParagraph> out;
  out.reserve(unique.size());
  for (auto& [key, p] : unique) out.push_back(std::move(p));
  return out;
}

FeatureModel BuildFeatureModel(const PairDataset& train, const FeatureConfig& config) {
  std::vector<std::string> texts;
  for (auto& p : DistinctParagraphs(train)) texts.push_back(std::move(p.text));
  FeatureModel model = BuildFeatureModel(texts, config);
  model.tokenizer = train.header.tokenizer;
  model.truncation = train.header.truncation;
  return model;
}

SparseVector Vectorize(std::string_view text, const FeatureModel& model) {
  std::unordered_map<std::uint32_t, std::uint64_t> tf;
  const auto stream = PrepareCharStream(text);
  ForEachNgram(stream, model.vocab.n(), [&](std::u32string_view g) {
    if (auto idx = model.vocab.Find(g)) ++tf[*idx];
  });
  std::vector<SparseEntry> entries;
  entries.reserve(tf.size());
  double norm = 0.0;
  for (const auto& [idx, count] : tf) {
    const double w = static_cast<double>(count) * model.idf.weights[idx];
    entries.push_back({idx, w});
  }
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& l, const SparseEntry& r) { return l.index < r.index; });
  for (const auto& e : entries) norm += e.weight * e.weight;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& e : entries) e.weight /= norm;
  }
  return SparseVector::FromEntries(std::move(entries));
}

void SaveFeatureModel(const FeatureModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["n"] = model.config.n;
  j["max_size"] = model.config.max_size;
  j["n_docs"] = model.idf.n_docs;
  j["tokenizer"] = std::string(ToString(model.tokenizer.unit));
  j["truncation"] = {{"max_combined", model.truncation.max_combined},
                     {"reserve", model.truncation.reserve}};
  auto ngrams = nlohmann::ordered_json::array();
  auto counts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    ngrams.push_back(unicode::Encode(model.vocab.ngram(i)));
    counts.push_back(model.vocab.count(i));
  }
  j["ngrams"] = std::move(ngrams);
  j["counts"] = std::move(counts);
  j["idf"] = model.idf.weights;
  WriteFileAtomic(path, j.dump() + "\n");
}

FeatureModel LoadFeatureModel(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  try {
    if (j.value("format", "") != kModelFormat) {
      Fail(ErrorKind::kParse, path.string() + ": not a feature model");
    }
    FeatureModel model;
    model.config.n = j.at("n").get<int>();
    model.config.max_size = j.at("max_size").get<std::size_t>();
    model.config.Validate();
    model.tokenizer.unit = ParseTokenUnit(j.at("tokenizer").get<std::string>());
    model.truncation.max_combined = j.at("truncation").at("max_combined").get<int>();
    model.truncation.reserve = j.at("truncation").at("reserve").get<int>();
    std::vector<std::u32string> ngrams;
    for (const auto& g : j.at("ngrams")) ngrams.push_back(unicode::Decode(g.get<std::string>()));
    auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
    model.vocab = Vocabulary(model.config.n, std::move(ngrams), std::move(counts));
    model.idf.n_docs = j.at("n_docs").get<std::size_t>();
    model.idf.weights = j.at("idf").get<std::vector<double>>();
    if (model.idf.weights.size() != model.vocab.size()) {
      Fail(ErrorKind::kParse, path.string() + ": idf table does not match vocabulary");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace authdrift
