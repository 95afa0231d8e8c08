#include <set>

#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

TEST_CASE("oracle self-play completes and validates") {
  const auto& w = testing::world();
  auto goals = sample_goals(w.db, 21, 30);
  for (const auto& g : goals) {
    auto r = self_play(g, w.manuals[2], w.db, 5);
    CHECK(r.completed);
    CHECK(r.dialogue.turns.size() <= 20);
    CHECK(validate(r.dialogue, w.db, &w.manuals[2]).empty());
    CHECK(self_play(g, w.manuals[2], w.db, 5).dialogue == r.dialogue);
  }
}

TEST_CASE("corpus splits use disjoint manuals and are reproducible") {
  const auto& c = testing::small_corpus();
  CHECK(c.train.size() == 60);
  CHECK(c.dev.size() == 20);
  CHECK(c.test.size() == 20);
  std::set<std::string> train, test;
  for (const auto& d : c.train) train.insert(d.manual_id);
  for (const auto& d : c.dev) train.insert(d.manual_id);
  for (const auto& d : c.test) test.insert(d.manual_id);
  for (const auto& m : test) CHECK_FALSE(train.count(m));
  CHECK(c.manifest["test_manuals"].size() == 4);
  auto stats = corpus_stats(c.train);
  CHECK(stats.turns_per_dialogue > 3.0);
  CHECK(stats.no_instruction_share > 0.0);
}

TEST_CASE("corpus directory round trip") {
  const auto& c = testing::small_corpus();
  auto dir = std::filesystem::temp_directory_path() / "magdial-test-corpus";
  save_corpus_dir(dir.string(), c);
  auto back = load_corpus_dir(dir.string());
  CHECK(back.train == c.train);
  CHECK(back.test == c.test);
  CHECK(back.manifest == c.manifest);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid corpus partitions are rejected") {
  const auto& w = testing::world();
  CorpusConfig cfg;
  cfg.train = 2;
  cfg.dev = 0;
  cfg.test = 2;
  cfg.test_manuals = {};
  CHECK_THROWS_AS(generate_corpus(w.db, w.manuals, cfg), Error);
}
