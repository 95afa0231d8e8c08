#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"
#include "magdial/serialize.hpp"

using namespace magdial;

TEST_CASE("config sections parse and inherit") {
  auto c = parse_config(Json::parse(R"({
    "world": {"seed": 3, "scale": 0.5},
    "goals": {"max_domains": 2},
    "corpus": {"train": 5, "dev": 1, "test": 1},
    "eval": {"matcher": "lexical", "jobs": 1},
    "service": {"goals": 10, "token_seed": 9}
  })"));
  CHECK(c.world.seed == 3);
  CHECK(c.world.scale == 0.5);
  CHECK(c.corpus.train == 5);
  CHECK(c.corpus.goals.max_domains == 2);
  CHECK(c.eval.matcher == "lexical");
  CHECK(c.service.goals == 10);
  REQUIRE(c.service.token_seed);
  CHECK(*c.service.token_seed == 9);
  Json round = c;
  CHECK(Json(parse_config(round)) == round);
}

TEST_CASE("bad configs are config errors") {
  for (const char* text : {R"({"nope": {}})", R"({"world": {"scale": -1}})", R"({"eval": {"tagger": "x"}})",
                           R"({"corpus": {"train": "many"}})", "[]"}) {
    CAPTURE(text);
    try {
      parse_config(Json::parse(text));
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::config);
    }
  }
}

TEST_CASE("dialogue lines round trip and reject damage") {
  const auto& d = testing::small_corpus().train.front();
  auto line = serialize(d);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(deserialize<Dialogue>(line) == d);
  CHECK_THROWS_AS(deserialize<Dialogue>(line.substr(0, line.size() / 2)), Error);
  CHECK_THROWS_AS(deserialize<Manual>(line), Error);
}

TEST_CASE("world scale shrinks the entity tables") {
  WorldConfig w;
  w.scale = 0.1;
  auto db = generate_database(w);
  CHECK(db.entities_of("hotel").size() < testing::world().db.entities_of("hotel").size());
  CHECK_FALSE(db.entities_of("hotel").empty());
}
