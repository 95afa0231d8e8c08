#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "magdial/bleu.hpp"
#include "magdial/error.hpp"
#include "magdial/metrics.hpp"
#include "magdial/text.hpp"

using namespace magdial;

TEST_CASE("normalize folds case and width") {
  CHECK(text::normalize("  The  NORTH ") == "the north");
  CHECK(text::similarity("7pm", "7 pm") >= 0.8);
  CHECK(text::similarity("abc", "abc") == 1.0);
  CHECK(text::similarity("abc", "xyz") == 0.0);
}

TEST_CASE("tokenize splits punctuation and keeps offsets") {
  auto toks = text::tokenize("Hi, the Lensfield hotel.");
  REQUIRE(toks.size() == 6);
  CHECK(toks[0].text == "hi");
  CHECK(toks[1].text == ",");
  CHECK(toks[3].begin == 8);
  CHECK(toks[3].end == 17);
}

TEST_CASE("bleu matches the independent fixture") {
  auto f = testing::fixture("bleu_fixture.json");
  auto cands = f["candidates"].get<std::vector<std::string>>();
  auto refs = f["references"].get<std::vector<std::string>>();
  CHECK(std::abs(bleu_score(cands, refs) - f["corpus_bleu"].get<double>()) < 1e-9);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    CHECK(std::abs(bleu_score({cands[i]}, {refs[i]}) - f["sentence_bleu"][i].get<double>()) < 1e-9);
  }
}

TEST_CASE("bleu edge cases") {
  CHECK(bleu_score({"the train leaves at nine"}, {"the train leaves at nine"}) == doctest::Approx(1.0));
  CHECK(bleu_score({"yes"}, {"yes"}) == doctest::Approx(1.0));
  CHECK(bleu_score({"alpha beta gamma delta"}, {"one two three four"}) < 1e-6);
  CHECK(bleu_score({""}, {"anything"}) == 0.0);
  CHECK_THROWS_AS(bleu_score({"a"}, {}), Error);
}

TEST_CASE("turn prf conventions") {
  CHECK(turn_prf({}, {}) == PRF{1.0, 1.0, 1.0});
  CHECK(turn_prf({"a"}, {}) == PRF{0.0, 0.0, 0.0});
  CHECK(turn_prf({}, {"a"}) == PRF{0.0, 0.0, 0.0});
  auto p = turn_prf({"a", "b"}, {"b", "c", "d"});
  CHECK(p.precision == doctest::Approx(0.5));
  CHECK(p.recall == doctest::Approx(1.0 / 3));
  CHECK(p.f1 == doctest::Approx(0.4));
}

TEST_CASE("set prf matches the 50-turn reference") {
  auto f = testing::fixture("prf_fixture.json");
  std::vector<LabelSet> pred, gold;
  for (const auto& p : f["predicted"]) pred.push_back(p.get<LabelSet>());
  for (const auto& g : f["gold"]) gold.push_back(g.get<LabelSet>());
  REQUIRE(pred.size() == 50);
  auto r = set_prf(pred, gold);
  CHECK(std::abs(r.macro.precision - f["precision"].get<double>()) < 1e-12);
  CHECK(std::abs(r.macro.recall - f["recall"].get<double>()) < 1e-12);
  CHECK(std::abs(r.macro.f1 - f["f1"].get<double>()) < 1e-12);
  auto self = set_prf(gold, gold);
  CHECK(self.macro == PRF{1.0, 1.0, 1.0});
  CHECK_THROWS_AS(set_prf({{}}, {}), Error);
}

TEST_CASE("aer fixtures") {
  CHECK(aer({"the address is 12 main street"}, {{"12 main street"}}).rate == 0.0);
  CHECK(aer({"sorry, nothing"}, {{"12 main street"}}).rate == 1.0);
  CHECK(aer({"it is in the north"}, {{"north", "01223 356354"}}).rate == doctest::Approx(0.5));
  auto skipped = aer({"hello", "north"}, {{}, {"north"}});
  CHECK(skipped.turns == 1);
  CHECK(skipped.rate == 0.0);
}

TEST_CASE("sentence and token accuracy") {
  CHECK(instr_sentence_accuracy({{true, false}, {true, true}}, {{true, false}, {false, true}}) == doctest::Approx(0.75));
  std::vector<std::vector<Tag>> a{{Tag{}, Tag{TagKind::B, 1}}}, b{{Tag{}, Tag{}}};
  CHECK(token_tag_accuracy(a, b) == doctest::Approx(0.5));
  CHECK(token_tag_accuracy(a, a) == 1.0);
}
