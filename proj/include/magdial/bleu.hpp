#pragma once

// BLEU with clipped 1..4-gram precisions and the corpus brevity penalty.
// Zero precisions are replaced by kEpsilon; n-gram orders for which the
// candidate side has no n-grams at all are left out of the geometric mean.

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace magdial::bleu {

inline constexpr double kEpsilon = 1e-9;
inline constexpr int kMaxOrder = 4;

using Tokens = std::vector<std::string>;

struct Stats {
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  Stats& operator+=(const Stats& other);
};

// N-gram counts of one token sequence, keyed by the joined n-gram.
struct NgramCounts {
  std::array<std::unordered_map<std::string, std::size_t>, kMaxOrder> orders;
  std::size_t length = 0;
};

NgramCounts count_ngrams(const Tokens& tokens);

// Same as sentence_stats over precounted sequences.
Stats sentence_stats(const NgramCounts& candidate, const std::vector<const NgramCounts*>& references);

// Clipped counts of `candidate` against the max count over `references`;
// reference length is the one closest to the candidate (shorter on ties).
Stats sentence_stats(const Tokens& candidate, const std::vector<Tokens>& references);

double score(const Stats& stats);

double sentence_bleu(const Tokens& candidate, const std::vector<Tokens>& references);

// references[i] holds the references of candidates[i].
double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<std::vector<Tokens>>& references);

}  // namespace magdial::bleu
