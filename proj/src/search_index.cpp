#include "magdial/search_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magdial/error.hpp"
#include "magdial/text.hpp"

namespace magdial {

SearchIndex::SearchIndex(const Manual& manual, Field field) {
  std::vector<TermWeights> tfs;
  std::map<std::string, std::size_t> df;
  for (const auto& ins : manual.instructions) {
    ids_.push_back(ins.id);
    TermWeights tf;
    if (field == Field::full_text) {
      add_terms(tf, ins.full_text());
    } else {
      add_terms(tf, ins.condition, 2.0);
      add_terms(tf, ins.solution);
    }
    for (const auto& [t, c] : tf) ++df[t];
    tfs.push_back(std::move(tf));
  }
  const double n = static_cast<double>(ids_.size());
  default_idf_ = std::log((1.0 + n) / 1.0) + 1.0;
  for (const auto& [t, d] : df) idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0;
  for (std::size_t i = 0; i < tfs.size(); ++i) {
    double norm = 0.0;
    for (const auto& [t, c] : tfs[i]) {
      double w = (1.0 + std::log(c)) * idf_[t];
      postings_[t].emplace_back(i, w);
      norm += w * w;
    }
    norms_.push_back(std::sqrt(norm));
  }
}

void SearchIndex::add_terms(TermWeights& into, std::string_view text, double weight) {
  for (auto& t : text::terms(text)) into[std::move(t)] += weight;
}

double SearchIndex::idf(const std::string& term) const {
  auto it = idf_.find(term);
  return it == idf_.end() ? default_idf_ : it->second;
}

std::vector<double> SearchIndex::scores(const TermWeights& query) const {
  std::vector<double> out(ids_.size(), 0.0);
  double qnorm = 0.0;
  for (const auto& [t, c] : query) {
    auto it = postings_.find(t);
    if (it == postings_.end() || c <= 0.0) continue;  // out-of-vocabulary terms cannot match
    double w = (1.0 + std::log(c)) * idf_.at(t);
    qnorm += w * w;
    for (const auto& [doc, dw] : it->second) out[doc] += w * dw;
  }
  if (qnorm == 0.0) return out;
  qnorm = std::sqrt(qnorm);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = norms_[i] == 0.0 ? 0.0 : out[i] / (qnorm * norms_[i]);
  return out;
}

std::vector<double> SearchIndex::scores(std::string_view query) const {
  TermWeights q;
  add_terms(q, query);
  return scores(q);
}

std::vector<SearchHit> SearchIndex::search(std::string_view query, int k) const {
  if (k <= 0) throw Error(Error::Kind::argument, "search: k must be positive");
  auto s = scores(query);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return ids_[a] < ids_[b];
  });
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < order.size() && hits.size() < static_cast<std::size_t>(k); ++i) {
    hits.push_back({order[i], ids_[order[i]], s[order[i]]});
  }
  return hits;
}

SearchIndex build_index(const Manual& manual) { return SearchIndex(manual); }

std::vector<SearchHit> search(const SearchIndex& index, std::string_view query, int k) {
  return index.search(query, k);
}

}  // namespace magdial
