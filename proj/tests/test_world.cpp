#include <algorithm>
#include <set>

#include "common.hpp"
#include "doctest.h"
#include "magdial/api_engine.hpp"
#include "magdial/error.hpp"
#include "magdial/rng.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

namespace {

ApiCall find_call(std::vector<std::pair<std::string, std::string>> args) {
  ApiCall c;
  c.api = "hotel_find";
  const std::vector<std::string> order{"area", "price", "stars"};
  std::sort(args.begin(), args.end(), [&](const auto& a, const auto& b) {
    return std::find(order.begin(), order.end(), a.first) < std::find(order.begin(), order.end(), b.first);
  });
  for (auto& [k, v] : args) c.args.push_back({k, v, std::nullopt});
  return c;
}

}  // namespace

TEST_CASE("default database validates and has the bundled shape") {
  const auto& db = testing::world().db;
  CHECK(validate(db).empty());
  for (const auto& [domain, n] : default_entity_counts()) CHECK(db.entities_of(domain).size() == n);
  CHECK(db.domain("taxi")->entity_less);
  CHECK(generate_database({}) == db);
  WorldConfig other;
  other.seed = 5;
  CHECK_FALSE(generate_database(other) == db);
}

TEST_CASE("find is exact and reports the full count") {
  auto db = testing::toy_table(40, 1);
  SessionDbState s;
  auto r = execute(find_call({{"area", "North"}}), db, s);
  std::size_t expected = 0;
  for (const auto& e : db.entities_of("hotel")) expected += *e.get("area") == "north";
  CHECK(r.count == expected);
  CHECK(r.entities.size() == std::min<std::size_t>(expected, 10));
}

TEST_CASE("carryover merges sequential finds and resets per domain") {
  auto db = testing::toy_table(20, 2);
  SessionDbState s;
  execute(find_call({{"area", "north"}}), db, s);
  auto r = execute(find_call({{"price", "cheap"}}), db, s);
  SessionDbState fresh;
  auto merged = execute(find_call({{"area", "north"}, {"price", "cheap"}}), db, fresh);
  CHECK(r == merged);
  reset_carryover(s, "hotel");
  auto after = execute(find_call({{"price", "cheap"}}), db, s);
  SessionDbState fresh2;
  CHECK(after == execute(find_call({{"price", "cheap"}}), db, fresh2));
}

TEST_CASE("carryover equivalence over random sequences") {
  auto db = testing::toy_table(20, 9);
  Rng rng(77);
  const std::map<std::string, std::vector<std::string>> values{
      {"area", {"north", "south", "east", "west"}}, {"price", {"cheap", "moderate", "expensive"}}, {"stars", {"2", "3", "4"}}};
  EngineOptions all{20};
  for (int trial = 0; trial < 200; ++trial) {
    SessionDbState seq;
    std::map<std::string, std::string> merged;
    ApiResult last;
    const std::size_t calls = 1 + rng.below(4);
    for (std::size_t c = 0; c < calls; ++c) {
      std::vector<std::pair<std::string, std::string>> args;
      for (const auto& [k, vs] : values) {
        if (rng.chance(0.4)) args.emplace_back(k, rng.pick(vs));
      }
      for (const auto& [k, v] : args) merged[k] = v;
      last = execute(find_call(args), db, seq, all);
    }
    SessionDbState one;
    auto single = execute(find_call({merged.begin(), merged.end()}), db, one, all);
    REQUIRE(last == single);
  }
}

TEST_CASE("range queries and bad calls are rejected") {
  auto db = testing::toy_table(5, 1);
  SessionDbState s;
  CHECK_THROWS_AS(execute(find_call({{"stars", ">3"}}), db, s), Error);
  ApiCall bad;
  bad.api = "nope";
  CHECK_THROWS_AS(execute(bad, db, s), Error);
  ApiCall misordered = find_call({});
  misordered.args = {{"stars", "3", std::nullopt}, {"area", "north", std::nullopt}};
  CHECK_FALSE(validate(misordered, db).empty());
}

TEST_CASE("reference numbers are deterministic and distinct") {
  CHECK(reference_number(1, 1) == reference_number(1, 1));
  CHECK(reference_number(1, 1) != reference_number(1, 2));
  CHECK(reference_number(1, 1).size() == 8);
  CHECK(std::isalpha(static_cast<unsigned char>(reference_number(5, 3)[0])));
}

TEST_CASE("booking lifecycle on the default database") {
  const auto& db = testing::world().db;
  const ApiSpec* add = nullptr;
  for (const auto& a : db.apis) {
    if (a.domain == "restaurant" && a.operation == Operation::add) add = &a;
  }
  REQUIRE(add);
  ApiCall call;
  call.api = add->name;
  for (const auto& in : add->inputs) {
    std::string v = in.attribute == "name" ? *db.entities_of("restaurant").front().get("name")
                                           : db.values("restaurant", in.attribute).front();
    call.args.push_back({in.attribute, v, std::nullopt});
  }
  SessionDbState s;
  s.seed = 42;
  auto r = execute(call, db, s);
  CHECK(r.reference == reference_number(42, 1));
  CHECK(active_bookings(s).size() == 1);
  for (const auto& a : db.apis) {
    if (a.domain == "restaurant" && a.operation == Operation::remove) {
      ApiCall cancel{a.name, std::nullopt, {{"reference num.", r.reference, std::nullopt}}};
      execute(cancel, db, s);
      CHECK(active_bookings(s).empty());
      CHECK_THROWS_AS(execute(cancel, db, s), Error);
    }
  }
}
