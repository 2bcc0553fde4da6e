#include "core/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "core/error.hpp"

namespace authdrift::unicode {

std::u32string Decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const bool ok = ForEachCodePoint(utf8, [&](char32_t c, std::size_t, std::size_t) {
    out.push_back(c);
    return true;
  });
  if (!ok) Fail(ErrorKind::kParse, "malformed UTF-8");
  return out;
}

std::string Encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    std::uint8_t buf[U8_MAX_LENGTH];
    std::int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) Fail(ErrorKind::kInvalidArgument, "code point cannot be encoded");
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

bool IsValid(std::string_view utf8) {
  return ForEachCodePoint(utf8, [](char32_t, std::size_t, std::size_t) { return true; });
}

std::size_t CountCodePoints(std::string_view utf8) {
  std::size_t n = 0;
  const bool ok = ForEachCodePoint(utf8, [&](char32_t, std::size_t, std::size_t) {
    ++n;
    return true;
  });
  if (!ok) Fail(ErrorKind::kParse, "malformed UTF-8");
  return n;
}

bool IsWhitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

std::string_view PrefixCodePoints(std::string_view utf8, std::size_t n) {
  std::size_t seen = 0;
  std::size_t end = 0;
  ForEachCodePoint(utf8, [&](char32_t, std::size_t, std::size_t next) {
    if (seen == n) return false;
    ++seen;
    end = next;
    return true;
  });
  return utf8.substr(0, end);
}

std::string NormalizeNfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) Fail(ErrorKind::kIo, "ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<std::int32_t>(utf8.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return std::string(utf8);
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = nfc->normalize(src, status);
  if (U_FAILURE(status)) Fail(ErrorKind::kParse, "NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string CollapseWhitespace(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  bool in_space = false;
  const bool ok = ForEachCodePoint(utf8, [&](char32_t c, std::size_t start, std::size_t next) {
    if (IsWhitespace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      in_space = false;
      out.append(utf8.substr(start, next - start));
    }
    return true;
  });
  if (!ok) Fail(ErrorKind::kParse, "malformed UTF-8");
  return out;
}

std::string_view TrimWhitespace(std::string_view utf8) {
  std::size_t first = utf8.size();
  std::size_t last = 0;
  ForEachCodePoint(utf8, [&](char32_t c, std::size_t start, std::size_t next) {
    if (!IsWhitespace(c)) {
      if (first == utf8.size()) first = start;
      last = next;
    }
    return true;
  });
  if (first == utf8.size()) return utf8.substr(0, 0);
  return utf8.substr(first, last - first);
}

}  // namespace authdrift::unicode
