#include <algorithm>
#include <map>
#include <set>

#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/responder.hpp"
#include "magdial/search_index.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

TEST_CASE("compiled manuals validate and follow the family counts") {
  const auto& w = testing::world();
  REQUIRE(w.manuals.size() == 14);
  for (const auto& m : w.manuals) {
    CHECK(validate(m, w.db).empty());
    std::map<DomainName, std::size_t> per;
    for (const auto& ins : m.instructions) ++per[ins.domain];
    CHECK(per == default_instruction_counts());
  }
  CHECK(w.manuals[0].id == "m00");
  CHECK(w.manuals[0].instructions.size() == 516);
  CHECK(w.manuals[0].instructions[0].family == w.manuals[1].instructions[0].family);
  CHECK(w.manuals[0].instructions[0].condition != w.manuals[1].instructions[0].condition);
}

TEST_CASE("mention counts match api arity") {
  const auto& w = testing::world();
  for (const auto& ins : w.manuals[3].instructions) {
    if (!ins.api) continue;
    const auto* spec = w.db.api(ins.api->api);
    REQUIRE(spec);
    CHECK(ins.api->mentions.size() == spec->inputs.size());
  }
}

TEST_CASE("search index retrieves every instruction by its own condition") {
  const auto& m = testing::world().manuals[5];
  SearchIndex index(m);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m.instructions.size(); ++i) {
    auto top = index.search(m.instructions[i].condition + " " + m.instructions[i].solution, 1);
    hits += !top.empty() && top[0].position == i;
  }
  CHECK(hits == m.instructions.size());
  CHECK_THROWS_AS(index.search("x", 0), Error);
}

TEST_CASE("paraphrase gate decisions") {
  std::vector<std::string> same(14, "tell the user the hotel phone number");
  auto r = paraphrase_gate(same);
  CHECK(r.self_bleu == 1.0);
  CHECK_FALSE(r.accepted);
  auto d = paraphrase_gate({"alpha beta gamma delta", "one two three four"});
  CHECK(d.self_bleu < 1e-6);
  CHECK(d.accepted);
  CHECK_THROWS_AS(paraphrase_gate({"only one"}), Error);
  CHECK_THROWS_AS(paraphrase_gate({"a b", "   "}), Error);
}

TEST_CASE("paraphrase gate matches the independent oracle and ignores order") {
  auto f = testing::fixture("bleu_fixture.json");
  auto variants = f["gate_variants"].get<std::vector<std::string>>();
  auto r = paraphrase_gate(variants);
  CHECK(std::abs(r.self_bleu - f["gate_self_bleu"].get<double>()) < 1e-9);
  CHECK(r.accepted == f["gate_accepted"].get<bool>());
  std::reverse(variants.begin(), variants.end());
  CHECK(paraphrase_gate(variants).self_bleu == r.self_bleu);
}

TEST_CASE("goals are distinct, valid and round trip through the checklist") {
  const auto& db = testing::world().db;
  auto goals = sample_goals(db, 3, 100);
  std::set<std::string> seen;
  for (const auto& g : goals) {
    CHECK(validate(g, db).empty());
    seen.insert(Json(g.constraints).dump() + Json(g.requests).dump() + Json(g.domains).dump());
    auto r = render_goal(g);
    CHECK(parse_checklist(r.table) == r.checklist);
    CHECK_FALSE(r.description.empty());
    for (const auto& c : g.constraints) {
      CHECK(c.attribute != "name");
      CHECK(c.attribute != "phone");
    }
    if (std::count(g.domains.begin(), g.domains.end(), "taxi")) {
      std::set<std::string> attrs;
      for (const auto& c : g.constraints) {
        if (c.domain == "taxi") attrs.insert(c.attribute);
      }
      CHECK(attrs.count("departure"));
      CHECK(attrs.count("destination"));
    }
  }
  CHECK(seen.size() == goals.size());
  CHECK(sample_goals(db, 3, 100) == goals);
  CHECK_THROWS_AS(parse_checklist("bogus line"), Error);
}

TEST_CASE("responder fills result placeholders") {
  const auto& w = testing::world();
  const auto& d = testing::small_corpus().train.front();
  const Manual* manual = nullptr;
  for (const auto& m : w.manuals) {
    if (m.id == d.manual_id) manual = &m;
  }
  REQUIRE(manual);
  for (const auto& t : d.turns) {
    if (t.api_results.empty()) continue;
    std::vector<const Instruction*> sel;
    for (const auto& id : t.selected_instructions) sel.push_back(manual->find(id));
    auto a = realize(sel, t.api_calls, t.api_results, {}, 1);
    auto b = realize(sel, t.api_calls, t.api_results, {}, 1);
    CHECK(a.text == b.text);
    CHECK(a.text.find('{') == std::string::npos);
  }
  CHECK(placeholders("the {name} is in the {area}") == std::vector<Attribute>{"name", "area"});
}
