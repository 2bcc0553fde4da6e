#include <array>
#include <cstring>
#include <fstream>

#include "core/corpus.hpp"
#include "core/error.hpp"

// corpus.bin layout (little-endian):
//   magic "ADCORPUS" | u32 version | u8 tokenizer | u64 min_tokens | u64 n_docs
//   per document: str doc_id | str author_id | i32 year | u64 total_paragraphs
//                 | u64 n_paragraphs | per paragraph: u32 index | u64 tokens | str text
//   str = u64 byte length + bytes

namespace authdrift {
namespace {

constexpr std::array<char, 8> kMagic = {'A', 'D', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  template <typename T>
  void Int(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    out_.write(bytes, sizeof(T));
  }
  void Str(const std::string& s) {
    Int<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string source) : in_(in), source_(std::move(source)) {}

  template <typename T>
  T Int() {
    using U = std::make_unsigned_t<T>;
    unsigned char bytes[sizeof(T)];
    Read(reinterpret_cast<char*>(bytes), sizeof(T));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(bytes[i]) << (8 * i);
    return static_cast<T>(u);
  }
  std::string Str() {
    const auto n = Int<std::uint64_t>();
    if (n > (std::uint64_t{1} << 34)) Fail(ErrorKind::kParse, source_ + ": corrupt string length");
    std::string s(n, '\0');
    Read(s.data(), n);
    return s;
  }
  void Read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      Fail(ErrorKind::kParse, source_ + ": truncated corpus file");
    }
  }

 private:
  std::ifstream& in_;
  std::string source_;
};

}  // namespace

void SaveCorpus(const SegmentedCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.Int<std::uint32_t>(kVersion);
  w.Int<std::uint8_t>(static_cast<std::uint8_t>(corpus.tokenizer.unit));
  w.Int<std::uint64_t>(corpus.min_tokens);
  w.Int<std::uint64_t>(corpus.documents.size());
  for (const auto& d : corpus.documents) {
    w.Str(d.doc_id);
    w.Str(d.author_id);
    w.Int<std::int32_t>(d.year);
    w.Int<std::uint64_t>(d.total_paragraphs);
    w.Int<std::uint64_t>(d.paragraphs.size());
    for (const auto& p : d.paragraphs) {
      w.Int<std::uint32_t>(p.index);
      w.Int<std::uint64_t>(p.token_count);
      w.Str(p.text);
    }
  }
  if (!out) Fail(ErrorKind::kIo, "write failed: " + path.string());
}

SegmentedCorpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "corpus file not found: " + path.string());
  Reader r(in, path.string());
  std::array<char, 8> magic{};
  r.Read(magic.data(), magic.size());
  if (magic != kMagic) Fail(ErrorKind::kParse, path.string() + ": not a corpus file");
  const auto version = r.Int<std::uint32_t>();
  if (version != kVersion) {
    Fail(ErrorKind::kParse, path.string() + ": unsupported corpus version " + std::to_string(version));
  }
  SegmentedCorpus corpus;
  const auto unit = r.Int<std::uint8_t>();
  if (unit > 1) Fail(ErrorKind::kParse, path.string() + ": unknown tokenizer id");
  corpus.tokenizer.unit = static_cast<TokenUnit>(unit);
  corpus.min_tokens = r.Int<std::uint64_t>();
  const auto n_docs = r.Int<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_docs; ++i) {
    CorpusDocument d;
    d.doc_id = r.Str();
    d.author_id = r.Str();
    d.year = r.Int<std::int32_t>();
    d.total_paragraphs = r.Int<std::uint64_t>();
    const auto n_par = r.Int<std::uint64_t>();
    for (std::uint64_t j = 0; j < n_par; ++j) {
      Paragraph p;
      p.doc_id = d.doc_id;
      p.index = r.Int<std::uint32_t>();
      p.token_count = r.Int<std::uint64_t>();
      p.text = r.Str();
      d.paragraphs.push_back(std::move(p));
    }
    corpus.documents.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace authdrift
