#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/utf8.h>

namespace authdrift::unicode {

// Calls fn(code_point, begin_byte, end_byte) per code point until fn returns
// false. Returns false if a malformed sequence is reached.
template <typename Fn>
bool ForEachCodePoint(std::string_view utf8, Fn&& fn) {
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto length = static_cast<std::int32_t>(utf8.size());
  std::int32_t i = 0;
  while (i < length) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
    if (!fn(static_cast<char32_t>(c), static_cast<std::size_t>(start),
            static_cast<std::size_t>(i))) {
      return true;
    }
  }
  return true;
}

// Throws Error(kParse) on malformed UTF-8.
std::u32string Decode(std::string_view utf8);
std::string Encode(std::u32string_view text);

bool IsValid(std::string_view utf8);
std::size_t CountCodePoints(std::string_view utf8);
bool IsWhitespace(char32_t c);

// Prefix holding at most `n` code points.
std::string_view PrefixCodePoints(std::string_view utf8, std::size_t n);

std::string NormalizeNfc(std::string_view utf8);
std::string CollapseWhitespace(std::string_view utf8);
std::string_view TrimWhitespace(std::string_view utf8);

}  // namespace authdrift::unicode
