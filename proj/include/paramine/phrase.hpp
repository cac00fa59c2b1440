#pragma once

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "paramine/error.hpp"

namespace paramine {

namespace detail {

inline bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

inline std::string to_nfc(std::string_view raw) {
  if (is_ascii(raw)) return std::string(raw);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

}  // namespace detail

/// Number of code points in a UTF-8 string. Ill-formed bytes count as one
/// character each.
inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    ++n;
  }
  return n;
}

inline std::u32string to_code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

/// NFC, then every run of Unicode white space becomes one ASCII space, then
/// leading and trailing space is dropped. No case folding.
inline std::string normalize_text(std::string_view raw) {
  const std::string nfc = detail::to_nfc(raw);
  std::string out;
  out.reserve(nfc.size());
  bool pending_space = false;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(nfc.size());
  const auto* p = reinterpret_cast<const uint8_t*>(nfc.data());
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out.append(nfc, static_cast<std::size_t>(start),
               static_cast<std::size_t>(i - start));
  }
  return out;
}

/// A normalized sentence. Phrases are opaque: two phrases are the same
/// phrase iff their normalized bytes are equal.
struct Phrase {
  std::string text;
  std::size_t char_len = 0;

  /// nullopt when nothing is left after normalization.
  static std::optional<Phrase> normalize(std::string_view raw) {
    std::string text = normalize_text(raw);
    if (text.empty()) return std::nullopt;
    const std::size_t n = utf8_length(text);
    return Phrase{std::move(text), n};
  }

  /// For text that is already normalized (e.g. read back from our own files).
  static Phrase from_normalized(std::string text) {
    const std::size_t n = utf8_length(text);
    return Phrase{std::move(text), n};
  }

  friend bool operator==(const Phrase& a, const Phrase& b) { return a.text == b.text; }
  friend std::strong_ordering operator<=>(const Phrase& a, const Phrase& b) {
    return a.text <=> b.text;
  }
};

}  // namespace paramine
