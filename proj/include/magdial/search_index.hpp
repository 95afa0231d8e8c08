#pragma once

// TF-IDF cosine retrieval over the instructions of one manual.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magdial/model.hpp"

namespace magdial {

using TermWeights = std::map<std::string, double>;

struct SearchHit {
  std::size_t position = 0;  // index into Manual::instructions
  std::string id;
  double score = 0.0;
};

class SearchIndex {
 public:
  enum class Field { condition_solution, full_text };

  // idf(t) = ln((1 + N) / (1 + df(t))) + 1; documents and queries weigh a
  // term by (1 + ln tf) * idf and are compared by cosine.
  explicit SearchIndex(const Manual& manual, Field field = Field::condition_solution);

  // Raw term counts of `text`, scaled by `weight`, added to `into`.
  static void add_terms(TermWeights& into, std::string_view text, double weight = 1.0);

  // Cosine score of every instruction, in manual order.
  std::vector<double> scores(const TermWeights& query) const;
  std::vector<double> scores(std::string_view query) const;

  // Top-k by score, ties by instruction id. Throws Error(argument) for k <= 0.
  std::vector<SearchHit> search(std::string_view query, int k) const;

  std::size_t size() const { return ids_.size(); }
  double idf(const std::string& term) const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, double> idf_;
  // term -> (document, tf-idf weight)
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> postings_;
  std::vector<double> norms_;
  double default_idf_ = 1.0;
};

SearchIndex build_index(const Manual& manual);
std::vector<SearchHit> search(const SearchIndex& index, std::string_view query, int k);

}  // namespace magdial
