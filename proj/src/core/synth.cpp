#include "core/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/unicode.hpp"

namespace authdrift {
namespace {

// Up to 46 basic hiragana plus the ideographic comma and full stop.
std::vector<char32_t> Alphabet(std::size_t size) {
  static constexpr char32_t kKana[] = {
      U'あ', U'い', U'う', U'え', U'お', U'か', U'き', U'く', U'け', U'こ', U'さ', U'し',
      U'す', U'せ', U'そ', U'た', U'ち', U'つ', U'て', U'と', U'な', U'に', U'ぬ', U'ね',
      U'の', U'は', U'ひ', U'ふ', U'へ', U'ほ', U'ま', U'み', U'む', U'め', U'も', U'や',
      U'ゆ', U'よ', U'ら', U'り', U'る', U'れ', U'ろ', U'わ', U'を', U'ん', U'、', U'。'};
  std::vector<char32_t> out(std::begin(kKana), std::end(kKana));
  if (size < out.size()) out.erase(out.begin() + static_cast<std::ptrdiff_t>(size) - 2, out.end() - 2);
  return out;
}

using Matrix = std::vector<double>;  // row-major k x k log-weights

Matrix RandomMatrix(Rng& rng, std::size_t k) {
  Matrix m(k * k);
  for (double& v : m) v = rng.Normal();
  return m;
}

// Row-wise cumulative distributions from log-weights base + scale * sig.
std::vector<double> Cumulative(const Matrix& base, const Matrix& sig, double scale, std::size_t k) {
  std::vector<double> cdf(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      total += std::exp(base[i * k + j] + scale * sig[i * k + j]);
      cdf[i * k + j] = total;
    }
    for (std::size_t j = 0; j < k; ++j) cdf[i * k + j] /= total;
  }
  return cdf;
}

std::size_t Step(Rng& rng, const std::vector<double>& cdf, std::size_t row, std::size_t k) {
  const auto first = cdf.begin() + static_cast<std::ptrdiff_t>(row * k);
  const auto last = first + static_cast<std::ptrdiff_t>(k);
  const auto it = std::upper_bound(first, last, rng.Uniform01());
  return std::min<std::size_t>(static_cast<std::size_t>(it - first), k - 1);
}

std::string SampleParagraph(Rng& rng, const std::vector<double>& cdf, const std::vector<char32_t>& alphabet,
                            std::size_t length) {
  const std::size_t k = alphabet.size();
  std::u32string text;
  text.reserve(length);
  std::size_t state = rng.Below(k);
  for (std::size_t i = 0; i < length; ++i) {
    state = Step(rng, cdf, state, k);
    text += alphabet[state];
  }
  return unicode::Encode(text);
}

std::string AuthorId(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "author%02zu", i);
  return buf;
}

}  // namespace

void SynthConfig::Validate() const {
  if (authors < 2) Fail(ErrorKind::kInvalidArgument, "synthetic corpus needs at least 2 authors");
  if (docs_per_era == 0 || paragraphs_per_doc == 0) {
    Fail(ErrorKind::kInvalidArgument, "synthetic corpus needs documents and paragraphs");
  }
  if (min_paragraph_chars == 0 || max_paragraph_chars < min_paragraph_chars) {
    Fail(ErrorKind::kInvalidArgument, "invalid synthetic paragraph length range");
  }
  if (!(shifted_fraction >= 0.0 && shifted_fraction <= 1.0) || !(shift >= 0.0 && shift <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "shifted_fraction and shift must lie in [0, 1]");
  }
  if (alphabet_size < 4 || alphabet_size > 48) {
    Fail(ErrorKind::kInvalidArgument, "alphabet_size must lie in [4, 48]");
  }
  if (!(signature >= 0.0)) Fail(ErrorKind::kInvalidArgument, "signature must be >= 0");
}

SynthCorpus GenerateSynthetic(const SynthConfig& config) {
  config.Validate();
  const auto alphabet = Alphabet(config.alphabet_size);
  const std::size_t k = alphabet.size();

  Rng language_rng(DeriveSeed(config.seed, "language"));
  const Matrix language = RandomMatrix(language_rng, k);

  SynthCorpus out;
  const auto shifted_count =
      static_cast<std::size_t>(std::llround(config.shifted_fraction * static_cast<double>(config.authors)));
  // Shifted authors are spread over the roster rather than the first n.
  std::vector<std::size_t> order(config.authors);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng roster_rng(DeriveSeed(config.seed, "roster"));
  roster_rng.Shuffle(order);
  std::vector<bool> shifted(config.authors, false);
  for (std::size_t i = 0; i < shifted_count; ++i) shifted[order[i]] = true;

  const std::size_t spread = config.max_paragraph_chars - config.min_paragraph_chars + 1;
  for (std::size_t a = 0; a < config.authors; ++a) {
    const std::string author = AuthorId(a);
    out.authors.push_back({author, shifted[a]});
    Rng author_rng(DeriveSeed(DeriveSeed(config.seed, "author"), a));
    const Matrix signature = RandomMatrix(author_rng, k);
    const Matrix fresh = RandomMatrix(author_rng, k);
    Matrix late = signature;
    if (shifted[a]) {
      // Convex mix, rescaled so the late signature keeps unit variance.
      const double w = config.shift;
      const double norm = std::sqrt(w * w + (1 - w) * (1 - w));
      for (std::size_t i = 0; i < late.size(); ++i) late[i] = ((1 - w) * signature[i] + w * fresh[i]) / norm;
    }
    const auto early_cdf = Cumulative(language, signature, config.signature, k);
    const auto late_cdf = Cumulative(language, late, config.signature, k);
    const int base_year = config.first_year + static_cast<int>(author_rng.Below(6));

    for (int era = 0; era < 2; ++era) {
      for (std::size_t d = 0; d < config.docs_per_era; ++d) {
        Document doc;
        doc.author_id = author;
        doc.year = base_year + era * config.era_gap + static_cast<int>(3 * d);
        doc.doc_id = author + (era == 0 ? "-early-" : "-late-") + std::to_string(d);
        Rng text_rng(DeriveSeed(config.seed, doc.doc_id));
        for (std::size_t p = 0; p < config.paragraphs_per_doc; ++p) {
          if (p > 0) doc.text += "\n\n";
          const std::size_t length = config.min_paragraph_chars + text_rng.Below(spread);
          doc.text += SampleParagraph(text_rng, era == 0 ? early_cdf : late_cdf, alphabet, length);
        }
        doc.text += '\n';
        out.documents.push_back(std::move(doc));
      }
    }
  }
  return out;
}

std::filesystem::path WriteSynthetic(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::string manifest;
  for (const auto& doc : corpus.documents) {
    const std::string rel = "texts/" + doc.doc_id + ".txt";
    WriteFileAtomic(dir / rel, doc.text);
    nlohmann::ordered_json j;
    j["doc_id"] = doc.doc_id;
    j["author_id"] = doc.author_id;
    j["year"] = doc.year;
    j["path"] = rel;
    manifest += j.dump();
    manifest += '\n';
  }
  const auto manifest_path = dir / "manifest.jsonl";
  WriteFileAtomic(manifest_path, manifest);

  nlohmann::ordered_json authors = nlohmann::ordered_json::array();
  for (const auto& a : corpus.authors) authors.push_back({{"author_id", a.author_id}, {"shifted", a.shifted}});
  WriteFileAtomic(dir / "authors.json", authors.dump(2) + "\n");
  return manifest_path;
}

}  // namespace authdrift
