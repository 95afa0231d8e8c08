#include "magdial/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "magdial/error.hpp"

namespace magdial::bleu {

Stats& Stats::operator+=(const Stats& other) {
  for (int n = 0; n < kMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

NgramCounts count_ngrams(const Tokens& tokens) {
  NgramCounts out;
  out.length = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key;
    for (std::size_t n = 0; n < static_cast<std::size_t>(kMaxOrder) && i + n < tokens.size(); ++n) {
      if (n) key.push_back('\x1f');
      key += tokens[i + n];
      ++out.orders[n][key];
    }
  }
  return out;
}

Stats sentence_stats(const NgramCounts& candidate, const std::vector<const NgramCounts*>& references) {
  Stats s;
  s.candidate_length = candidate.length;
  if (!references.empty()) {
    auto best = references.front()->length;
    for (const auto* r : references) {
      auto d = std::labs(static_cast<long>(r->length) - static_cast<long>(candidate.length));
      auto bd = std::labs(static_cast<long>(best) - static_cast<long>(candidate.length));
      if (d < bd || (d == bd && r->length < best)) best = r->length;
    }
    s.reference_length = best;
  }
  for (int n = 0; n < kMaxOrder; ++n) {
    for (const auto& [g, c] : candidate.orders[n]) {
      s.totals[n] += c;
      std::size_t max_ref = 0;
      for (const auto* r : references) {
        if (auto it = r->orders[n].find(g); it != r->orders[n].end()) max_ref = std::max(max_ref, it->second);
      }
      s.matches[n] += std::min(c, max_ref);
    }
  }
  return s;
}

Stats sentence_stats(const Tokens& candidate, const std::vector<Tokens>& references) {
  auto cand = count_ngrams(candidate);
  std::vector<NgramCounts> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(count_ngrams(r));
  std::vector<const NgramCounts*> ptrs;
  for (const auto& r : refs) ptrs.push_back(&r);
  return sentence_stats(cand, ptrs);
}

double score(const Stats& stats) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (stats.totals[n] == 0) continue;
    double p = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    log_sum += std::log(p > 0.0 ? p : kEpsilon);
    ++orders;
  }
  if (orders == 0) return 0.0;
  double bp = 1.0;
  if (stats.candidate_length < stats.reference_length) {
    bp = std::exp(1.0 - static_cast<double>(stats.reference_length) / static_cast<double>(stats.candidate_length));
  }
  return bp * std::exp(log_sum / orders);
}

double sentence_bleu(const Tokens& candidate, const std::vector<Tokens>& references) {
  return score(sentence_stats(candidate, references));
}

double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<std::vector<Tokens>>& references) {
  if (candidates.size() != references.size()) {
    throw Error(Error::Kind::argument, "bleu: candidate and reference counts differ");
  }
  Stats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += sentence_stats(candidates[i], references[i]);
  return score(total);
}

}  // namespace magdial::bleu
