#pragma once

// Tokenization and string similarity shared by search, BLEU, tagging and the
// fuzzy annotator. Offsets are byte offsets into the UTF-8 input.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace magdial::text {

struct Token {
  std::string text;  // case-folded surface
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Trim, NFC-normalize, case-fold and collapse internal whitespace runs to a
// single space.
std::string normalize(std::string_view s);

// Whitespace and punctuation splitting. Punctuation characters become their
// own tokens; CJK-like codepoints are one token each.
std::vector<Token> tokenize(std::string_view s);

// Terms used for BLEU and retrieval. Falls back to overlapping character
// bigrams when the text has no whitespace but several script tokens.
std::vector<std::string> terms(std::string_view s);

// Insertion/deletion edit distance over Unicode codepoints.
std::size_t indel_distance(std::u32string_view a, std::u32string_view b);

// 1 - indel / (|a| + |b|) over normalized codepoints; 1.0 for two empty strings.
double similarity(std::string_view a, std::string_view b);

std::u32string to_u32(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace magdial::text
