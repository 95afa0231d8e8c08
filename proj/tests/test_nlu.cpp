#include <algorithm>

#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"
#include "magdial/nlu.hpp"
#include "magdial/rng.hpp"

using namespace magdial;

namespace {

Dialogue two_turns() {
  Dialogue d;
  d.id = "t";
  Turn a;
  a.index = 0;
  a.user_utterance = "I need a cheap hotel in the north";
  a.agent_response = "There are 3 of those. Any preference on stars?";
  Turn b;
  b.index = 1;
  b.user_utterance = "4 stars, on Monday at 7 pm please";
  d.turns = {a, b};
  return d;
}

}  // namespace

TEST_CASE("history tokens cover U1 R1 U2") {
  auto d = two_turns();
  auto toks = history_tokens(d, 1);
  CHECK(toks.front().turn == 0);
  CHECK(toks.front().speaker == Speaker::user);
  CHECK(toks.back().turn == 1);
  CHECK(toks.back().text == "please");
  CHECK(history_tokens(d, 0).size() < toks.size());
}

TEST_CASE("tag alphabet and string forms") {
  for (int n = 1; n <= 3; ++n) CHECK(tag_alphabet(n).size() == static_cast<std::size_t>(1 + 2 * n));
  CHECK(to_string(Tag{TagKind::B, 2}) == "B-2");
  CHECK(tag_from_string("I-1") == Tag{TagKind::I, 1});
  CHECK(tag_from_string("O") == Tag{});
  CHECK_THROWS_AS(tag_from_string("X-1"), Error);
}

TEST_CASE("encode and decode round trip") {
  auto d = two_turns();
  auto toks = history_tokens(d, 1);
  Span cheap{0, Speaker::user, 9, 14};
  Span monday{1, Speaker::user, 12, 18};
  auto seq = encode({{1, cheap}, {2, monday}}, toks, 2);
  CHECK(well_formed(seq));
  auto back = decode(seq);
  REQUIRE(back.size() == 2);
  CHECK(back[0].index == 1);
  CHECK(back[0].span == cheap);
  CHECK(back[1].span == monday);
}

TEST_CASE("encode rejects overlap, misalignment and excess index") {
  auto d = two_turns();
  auto toks = history_tokens(d, 1);
  Span cheap{0, Speaker::user, 9, 14};
  CHECK_THROWS_AS(encode({{1, cheap}, {2, cheap}}, toks, 2), Error);
  CHECK_THROWS_AS(encode({{1, Span{0, Speaker::user, 10, 14}}}, toks, 2), Error);
  CHECK_THROWS_AS(encode({{3, cheap}}, toks, 2), Error);
  CHECK_THROWS_AS(encode({{2, cheap}}, toks, 2, 1), Error);
}

TEST_CASE("decode reads a stray I as a span start") {
  TagSequence s;
  s.max_args = 1;
  s.tokens.resize(3);
  for (std::size_t i = 0; i < 3; ++i) s.tokens[i] = {"w", 0, Speaker::user, i * 2, i * 2 + 1};
  s.tags = {Tag{}, Tag{TagKind::I, 1}, Tag{TagKind::I, 1}};
  CHECK_FALSE(well_formed(s));
  auto spans = decode(s);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].span.begin == 2);
  CHECK(spans[0].span.end == 5);
}

TEST_CASE("codec property over random span sets") {
  auto d = two_turns();
  auto toks = history_tokens(d, 1);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int max_args = 1 + static_cast<int>(rng.below(3));
    std::vector<ArgSpan> spans;
    std::size_t i = rng.below(3);
    int next = 1;
    while (i < toks.size() && next <= max_args) {
      std::size_t len = 1 + rng.below(3);
      std::size_t j = std::min(toks.size(), i + len);
      if (toks[i].turn != toks[j - 1].turn || toks[i].speaker != toks[j - 1].speaker) break;
      spans.push_back({next++, Span{toks[i].turn, toks[i].speaker, toks[i].begin, toks[j - 1].end}});
      i = j + rng.below(4);
    }
    auto seq = encode(spans, toks, max_args);
    REQUIRE(well_formed(seq));
    auto back = decode(seq);
    std::sort(spans.begin(), spans.end(), [](const ArgSpan& a, const ArgSpan& b) {
      return std::tie(a.span.turn, a.span.speaker, a.span.begin) < std::tie(b.span.turn, b.span.speaker, b.span.begin);
    });
    REQUIRE(back == spans);
  }
}

TEST_CASE("best match prefers later utterances and respects the threshold") {
  auto d = two_turns();
  d.turns[1].user_utterance = "north again, 7pm";
  auto hist = history(d, 1);
  auto m = best_match(hist, "north");
  REQUIRE(m);
  CHECK(m->span.turn == 1);
  auto t = best_match(hist, "7 pm");
  REQUIRE(t);
  CHECK(t->similarity >= 0.8);
  CHECK_FALSE(best_match(hist, "cambridge"));
}

TEST_CASE("pick operating point ties to the lower threshold") {
  std::vector<ScoredTurn> dev{{{"a", "b"}, {0.9, 0.2}, {"a"}}, {{"a", "b"}, {0.1, 0.95}, {"b"}}};
  const double t = pick_operating_point(dev, Objective::f1);
  CHECK(t == doctest::Approx(0.21));
  CHECK(pick_operating_point(dev, Objective::recall) == doctest::Approx(0.01));
  CHECK(threshold_grid().size() == 100);
  CHECK_THROWS_AS(pick_operating_point({}, Objective::f1), Error);
}

TEST_CASE("fuzzy annotation recovers every oracle argument") {
  const auto& c = testing::small_corpus();
  const auto& db = testing::world().db;
  std::size_t total = 0, exact = 0;
  for (const auto& d : c.train) {
    std::vector<CallRecord> log;
    for (const auto& t : d.turns) {
      for (std::size_t i = 0; i < t.api_calls.size(); ++i) log.push_back({t.index, t.api_calls[i], t.api_results[i]});
    }
    auto rep = fuzzy_annotate(d, log, db);
    CHECK(rep.unmatched.empty());
    std::vector<ArgumentAnnotation> gold;
    for (const auto& t : d.turns) gold.insert(gold.end(), t.argument_annotations.begin(), t.argument_annotations.end());
    total += gold.size();
    for (std::size_t i = 0; i < gold.size() && i < rep.annotations.size(); ++i) exact += gold[i] == rep.annotations[i].annotation;
  }
  CHECK(total > 0);
  CHECK(exact == total);
}

TEST_CASE("lexicon tagger with the manual beats the ablation") {
  const auto& c = testing::small_corpus();
  const auto& w = testing::world();
  LexiconTagger with(w.db), without(w.db, LexiconTaggerOptions{kFuzzyThreshold, kDefaultMaxArgs, false});
  std::size_t seen = 0, right_with = 0, right_without = 0;
  for (const auto& d : c.train) {
    const Manual* manual = nullptr;
    for (const auto& m : w.manuals) {
      if (m.id == d.manual_id) manual = &m;
    }
    REQUIRE(manual);
    for (const auto& t : d.turns) {
      for (const auto& id : t.selected_instructions) {
        const auto* ins = manual->find(id);
        if (!ins || !ins->api) continue;
        std::vector<ArgSpan> gold;
        for (const auto& a : t.argument_annotations) {
          if (a.instruction == id && a.index <= kDefaultMaxArgs) gold.push_back({a.index, a.span});
        }
        std::sort(gold.begin(), gold.end());
        auto a = decode(with.tag(d, t.index, *ins));
        auto b = decode(without.tag(d, t.index, *ins));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        ++seen;
        right_with += a == gold;
        right_without += b == gold;
      }
    }
  }
  CHECK(seen > 0);
  CHECK(right_with > right_without);
}
