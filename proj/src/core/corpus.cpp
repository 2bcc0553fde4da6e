#include "core/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/unicode.hpp"

namespace authdrift {
namespace {

using nlohmann::json;

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string ManifestError(const std::filesystem::path& path, std::size_t line,
                          const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

// fn(token_end_byte) per whitespace-delimited token, until fn returns false.
template <typename Fn>
void ForEachToken(std::string_view text, Fn&& fn) {
  bool in_token = false;
  std::size_t token_end = 0;
  bool stopped = false;
  const bool ok = unicode::ForEachCodePoint(text, [&](char32_t c, std::size_t, std::size_t next) {
    if (unicode::IsWhitespace(c)) {
      if (in_token && !fn(token_end)) {
        stopped = true;
        return false;
      }
      in_token = false;
    } else {
      in_token = true;
      token_end = next;
    }
    return true;
  });
  if (!ok) Fail(ErrorKind::kParse, "malformed UTF-8");
  if (in_token && !stopped) fn(token_end);
}

}  // namespace

std::string_view ToString(TokenUnit unit) {
  switch (unit) {
    case TokenUnit::kUnicodeChar: return "unicode_char";
    case TokenUnit::kWhitespace: return "whitespace";
  }
  return "unknown";
}

TokenUnit ParseTokenUnit(std::string_view name) {
  if (name == "unicode_char") return TokenUnit::kUnicodeChar;
  if (name == "whitespace") return TokenUnit::kWhitespace;
  Fail(ErrorKind::kInvalidArgument,
       "unknown tokenizer '" + std::string(name) + "' (expected unicode_char or whitespace)");
}

std::size_t CountTokens(std::string_view text, const TokenizerConfig& tokenizer) {
  if (tokenizer.unit == TokenUnit::kUnicodeChar) return unicode::CountCodePoints(text);
  std::size_t n = 0;
  ForEachToken(text, [&](std::size_t) {
    ++n;
    return true;
  });
  return n;
}

std::string_view TruncateTokens(std::string_view text, std::size_t max_tokens,
                                const TokenizerConfig& tokenizer) {
  if (tokenizer.unit == TokenUnit::kUnicodeChar) {
    return unicode::PrefixCodePoints(text, max_tokens);
  }
  std::size_t n = 0;
  std::size_t end = 0;
  bool truncated = false;
  ForEachToken(text, [&](std::size_t token_end) {
    if (n == max_tokens) {
      truncated = true;
      return false;
    }
    ++n;
    end = token_end;
    return true;
  });
  return truncated ? text.substr(0, end) : text;
}

void TruncationPolicy::Validate() const {
  if (max_combined < 2) {
    Fail(ErrorKind::kInvalidArgument, "max_combined must be >= 2");
  }
  if (reserve < 0 || max_combined - reserve < 2) {
    Fail(ErrorKind::kInvalidArgument,
         "reserve must be >= 0 and leave at least one token per side");
  }
}

std::vector<Document> LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "manifest not found: " + path.string());
  const std::filesystem::path base = path.parent_path();

  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::TrimWhitespace(line).empty()) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      Fail(ErrorKind::kParse, ManifestError(path, line_no, std::string("malformed JSON: ") + e.what()));
    }
    auto require_string = [&](const char* key) -> std::string {
      if (!record.contains(key) || !record[key].is_string()) {
        Fail(ErrorKind::kParse,
             ManifestError(path, line_no, std::string("missing or non-string field '") + key + "'"));
      }
      return record[key].get<std::string>();
    };

    if (!record.is_object()) Fail(ErrorKind::kParse, ManifestError(path, line_no, "record is not an object"));
    Document doc;
    doc.doc_id = require_string("doc_id");
    doc.author_id = require_string("author_id");
    if (doc.doc_id.empty()) Fail(ErrorKind::kParse, ManifestError(path, line_no, "empty doc_id"));
    if (doc.author_id.empty()) Fail(ErrorKind::kParse, ManifestError(path, line_no, "empty author_id"));
    if (!record.contains("year") || !record["year"].is_number_integer()) {
      Fail(ErrorKind::kParse, ManifestError(path, line_no, "missing or non-integer field 'year'"));
    }
    const auto year = record["year"].get<long long>();
    if (year <= 0 || year > 100000) {
      Fail(ErrorKind::kParse, ManifestError(path, line_no, "year must be a positive CE year"));
    }
    doc.year = static_cast<int>(year);

    const bool has_path = record.contains("path");
    const bool has_text = record.contains("text");
    if (has_path == has_text) {
      Fail(ErrorKind::kParse,
           ManifestError(path, line_no, "exactly one of 'path' or 'text' is required"));
    }
    if (has_text) {
      doc.text = require_string("text");
    } else {
      const std::filesystem::path text_path = base / require_string("path");
      if (!std::filesystem::is_regular_file(text_path)) {
        Fail(ErrorKind::kIo, ManifestError(path, line_no, "missing text file " + text_path.string()));
      }
      doc.text = ReadTextFile(text_path);
    }
    if (!unicode::IsValid(doc.text)) {
      Fail(ErrorKind::kParse, ManifestError(path, line_no, "text of '" + doc.doc_id + "' is not valid UTF-8"));
    }
    if (unicode::TrimWhitespace(doc.text).empty()) {
      Fail(ErrorKind::kParse, ManifestError(path, line_no, "text of '" + doc.doc_id + "' is empty"));
    }
    if (!seen.insert(doc.doc_id).second) {
      Fail(ErrorKind::kConstraint, ManifestError(path, line_no, "duplicate doc_id '" + doc.doc_id + "'"));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Paragraph> SegmentParagraphs(const Document& doc, const TokenizerConfig& tokenizer,
                                         std::size_t min_tokens) {
  std::vector<Paragraph> out;
  std::uint32_t index = 0;
  std::string_view text = doc.text;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of("\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view piece = unicode::TrimWhitespace(text.substr(start, end - start));
    if (!piece.empty()) {
      const std::size_t tokens = CountTokens(piece, tokenizer);
      if (tokens >= min_tokens) {
        out.push_back(Paragraph{doc.doc_id, index, std::string(piece), tokens});
      }
      ++index;
    }
    start = end + 1;
  }
  return out;
}

std::pair<std::string, std::string> TruncatePair(const Paragraph& first, const Paragraph& second,
                                                 const TokenizerConfig& tokenizer,
                                                 const TruncationPolicy& policy) {
  policy.Validate();
  const auto budget = static_cast<std::size_t>(policy.PerSideBudget());
  auto cut = [&](const Paragraph& p) {
    if (CountTokens(p.text, tokenizer) <= budget) return p.text;
    return std::string(TruncateTokens(p.text, budget, tokenizer));
  };
  return {cut(first), cut(second)};
}

IngestSummary SegmentedCorpus::Summarize() const {
  IngestSummary s;
  std::set<std::string_view> authors;
  std::set<std::string_view> admissible_authors;
  for (const auto& d : documents) {
    ++s.documents;
    authors.insert(d.author_id);
    s.paragraphs += d.total_paragraphs;
    s.admissible_paragraphs += d.paragraphs.size();
    if (!d.paragraphs.empty()) {
      ++s.admissible_documents;
      admissible_authors.insert(d.author_id);
    }
  }
  s.authors = authors.size();
  s.admissible_authors = admissible_authors.size();
  return s;
}

SegmentedCorpus Ingest(const std::vector<Document>& documents, const TokenizerConfig& tokenizer,
                       std::size_t min_tokens) {
  SegmentedCorpus corpus;
  corpus.tokenizer = tokenizer;
  corpus.min_tokens = min_tokens;
  corpus.documents.resize(documents.size());
  ParallelFor(documents.size(), [&](std::size_t i) {
    const Document& doc = documents[i];
    CorpusDocument& out = corpus.documents[i];
    out.doc_id = doc.doc_id;
    out.author_id = doc.author_id;
    out.year = doc.year;
    out.total_paragraphs = SegmentParagraphs(doc, tokenizer, 0).size();
    out.paragraphs = SegmentParagraphs(doc, tokenizer, min_tokens);
  });
  return corpus;
}

}  // namespace authdrift
