#include "magdial/metrics.hpp"

#include "magdial/error.hpp"
#include "magdial/text.hpp"

namespace magdial {

PRF turn_prf(const LabelSet& predicted, const LabelSet& gold) {
  if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  std::size_t hit = 0;
  for (const auto& p : predicted) hit += gold.count(p);
  PRF r;
  r.precision = predicted.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(predicted.size());
  r.recall = gold.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(gold.size());
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

PRFReport set_prf(const std::vector<LabelSet>& predicted, const std::vector<LabelSet>& gold) {
  if (predicted.size() != gold.size()) throw Error(Error::Kind::argument, "prediction and gold counts differ");
  PRFReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto r = turn_prf(predicted[i], gold[i]);
    report.macro.precision += r.precision;
    report.macro.recall += r.recall;
    report.macro.f1 += r.f1;
    report.turns.push_back(r);
  }
  if (!gold.empty()) {
    auto n = static_cast<double>(gold.size());
    report.macro.precision /= n;
    report.macro.recall /= n;
    report.macro.f1 /= n;
  }
  return report;
}

double instr_sentence_accuracy(const std::vector<std::vector<bool>>& predicted,
                               const std::vector<std::vector<bool>>& gold) {
  if (predicted.size() != gold.size()) throw Error(Error::Kind::argument, "prediction and gold counts differ");
  std::size_t right = 0, total = 0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (predicted[t].size() != gold[t].size()) throw Error(Error::Kind::argument, "decision vector lengths differ");
    for (std::size_t i = 0; i < gold[t].size(); ++i) {
      right += predicted[t][i] == gold[t][i];
      ++total;
    }
  }
  return total ? static_cast<double>(right) / static_cast<double>(total) : 1.0;
}

double token_tag_accuracy(const std::vector<std::vector<Tag>>& predicted, const std::vector<std::vector<Tag>>& gold) {
  if (predicted.size() != gold.size()) throw Error(Error::Kind::argument, "prediction and gold counts differ");
  std::size_t right = 0, total = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (predicted[s].size() != gold[s].size()) throw Error(Error::Kind::argument, "tag sequence lengths differ");
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      right += predicted[s][i] == gold[s][i];
      ++total;
    }
  }
  return total ? static_cast<double>(right) / static_cast<double>(total) : 1.0;
}

double token_tag_accuracy(const std::vector<TagSequence>& predicted, const std::vector<TagSequence>& gold) {
  std::vector<std::vector<Tag>> p, g;
  for (const auto& s : predicted) p.push_back(s.tags);
  for (const auto& s : gold) g.push_back(s.tags);
  return token_tag_accuracy(p, g);
}

double bleu_score(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
  if (candidates.size() != references.size()) throw Error(Error::Kind::argument, "candidate and reference counts differ");
  std::vector<bleu::Tokens> c;
  std::vector<std::vector<bleu::Tokens>> r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    c.push_back(text::terms(candidates[i]));
    r.push_back({text::terms(references[i])});
  }
  return bleu::corpus_bleu(c, r);
}

bool contains_value(std::string_view text, std::string_view value, double threshold) {
  std::vector<Utterance> one{{0, Speaker::agent, text}};
  return best_match(one, value, threshold).has_value();
}

AerReport aer(const std::vector<std::string>& responses, const std::vector<std::vector<std::string>>& expected,
              double threshold) {
  if (responses.size() != expected.size()) throw Error(Error::Kind::argument, "response and expectation counts differ");
  AerReport report;
  double sum = 0.0;
  for (std::size_t t = 0; t < responses.size(); ++t) {
    if (expected[t].empty()) continue;
    std::size_t missing = 0;
    for (const auto& v : expected[t]) missing += !contains_value(responses[t], v, threshold);
    double rate = static_cast<double>(missing) / static_cast<double>(expected[t].size());
    report.per_turn.push_back(rate);
    sum += rate;
    ++report.turns;
  }
  report.rate = report.turns ? sum / static_cast<double>(report.turns) : 0.0;
  return report;
}

void to_json(Json& j, const PRF& v) { j = Json{{"precision", v.precision}, {"recall", v.recall}, {"f1", v.f1}}; }

void to_json(Json& j, const PRFReport& v) { j = Json{{"macro", v.macro}, {"turns", v.turns.size()}}; }

void to_json(Json& j, const AerReport& v) { j = Json{{"rate", v.rate}, {"turns", v.turns}}; }

}  // namespace magdial
