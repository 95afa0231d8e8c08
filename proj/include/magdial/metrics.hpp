#pragma once

// Evaluation measures. Turn-level P/R/F1 is macro-averaged over turns; a turn
// whose predicted and gold sets are both empty scores 1 on all three.

#include <set>
#include <string>
#include <vector>

#include "magdial/bleu.hpp"
#include "magdial/model.hpp"
#include "magdial/nlu.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const PRF&) const = default;
};

using LabelSet = std::set<std::string>;

PRF turn_prf(const LabelSet& predicted, const LabelSet& gold);

struct PRFReport {
  PRF macro;
  std::vector<PRF> turns;
};

// Throws Error(argument) when the lists differ in length.
PRFReport set_prf(const std::vector<LabelSet>& predicted, const std::vector<LabelSet>& gold);

// predicted[t][i] and gold[t][i] are the decisions for instruction i at turn
// t. Throws Error(argument) when the shapes differ.
double instr_sentence_accuracy(const std::vector<std::vector<bool>>& predicted,
                               const std::vector<std::vector<bool>>& gold);

// Throws Error(argument) when sequence counts or lengths differ.
double token_tag_accuracy(const std::vector<TagSequence>& predicted, const std::vector<TagSequence>& gold);
double token_tag_accuracy(const std::vector<std::vector<Tag>>& predicted, const std::vector<std::vector<Tag>>& gold);

double bleu_score(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

struct AerReport {
  double rate = 0.0;
  std::size_t turns = 0;  // turns with at least one expected value
  std::vector<double> per_turn;
};

// expected[t] are the result values the response for turn t must contain;
// turns with none are skipped. A value counts as present when some token
// window of the response reaches `threshold` similarity.
AerReport aer(const std::vector<std::string>& responses, const std::vector<std::vector<std::string>>& expected,
              double threshold = kFuzzyThreshold);

// Whether `value` occurs in `text` with similarity >= threshold.
bool contains_value(std::string_view text, std::string_view value, double threshold = kFuzzyThreshold);

void to_json(Json& j, const PRF& v);
void to_json(Json& j, const PRFReport& v);
void to_json(Json& j, const AerReport& v);

}  // namespace magdial
