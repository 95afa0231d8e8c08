#include "magdial/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <numeric>

namespace magdial::text {
namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0 || c == 0x3000;
}

// Scripts written without spaces; each codepoint is its own token.
bool is_cjk(char32_t c) {
  return (c >= 0x3040 && c <= 0x30FF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0xAC00 && c <= 0xD7AF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0xFF00 && c <= 0xFFEF) ||
         (c >= 0x3000 && c <= 0x303F);
}

bool is_word(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
  return !is_cjk(c) && !is_space(c);
}

struct Decoded {
  char32_t cp;
  std::size_t begin;
  std::size_t end;
};

std::vector<Decoded> decode(std::string_view s) {
  std::vector<Decoded> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    }
    if (i + len > s.size()) len = s.size() - i;
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back({cp, i, i + len});
    i += len;
  }
  return out;
}

std::string fold(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (U_SUCCESS(status)) u = nfc->normalize(u, status);
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

std::u32string to_u32(std::string_view utf8) {
  std::u32string out;
  for (const auto& d : decode(utf8)) out.push_back(d.cp);
  return out;
}

std::string normalize(std::string_view s) {
  std::string folded = fold(s);
  std::string out;
  out.reserve(folded.size());
  bool pending_space = false;
  for (const auto& d : decode(folded)) {
    if (is_space(d.cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(folded, d.begin, d.end - d.begin);
  }
  return out;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  const auto cps = decode(s);
  std::size_t i = 0;
  while (i < cps.size()) {
    char32_t c = cps[i].cp;
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_word(c)) {
      while (j < cps.size() && is_word(cps[j].cp)) ++j;
    }
    std::size_t b = cps[i].begin;
    std::size_t e = cps[j - 1].end;
    tokens.push_back({fold(s.substr(b, e - b)), b, e});
    i = j;
  }
  return tokens;
}

std::vector<std::string> terms(std::string_view s) {
  auto tokens = tokenize(s);
  std::vector<std::string> out;
  bool has_space = std::any_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n'; });
  bool has_cjk = false;
  for (const auto& d : decode(s)) has_cjk = has_cjk || is_cjk(d.cp);
  if (!has_space && has_cjk && tokens.size() >= 2) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back(tokens[i].text + tokens[i + 1].text);
    return out;
  }
  out.reserve(tokens.size());
  for (auto& t : tokens) out.push_back(std::move(t.text));
  return out;
}

std::size_t indel_distance(std::u32string_view a, std::u32string_view b) {
  // LCS-based: indel = |a| + |b| - 2 * lcs
  if (a.empty() || b.empty()) return a.size() + b.size();
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return a.size() + b.size() - 2 * prev[b.size()];
}

double similarity(std::string_view a, std::string_view b) {
  auto ua = to_u32(normalize(a));
  auto ub = to_u32(normalize(b));
  std::size_t total = ua.size() + ub.size();
  if (total == 0) return 1.0;
  return 1.0 - static_cast<double>(indel_distance(ua, ub)) / static_cast<double>(total);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace magdial::text
