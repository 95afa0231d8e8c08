#include "common.hpp"

#include "magdial/rng.hpp"

namespace magdial::testing {

const World& world() {
  static const World w = build_world(WorldConfig{});
  return w;
}

const Corpus& small_corpus() {
  static const Corpus c = [] {
    CorpusConfig cfg;
    cfg.seed = 11;
    cfg.train = 60;
    cfg.dev = 20;
    cfg.test = 20;
    return generate_corpus(world().db, world().manuals, cfg);
  }();
  return c;
}

std::string fixture_path(const std::string& name) { return std::string(MAGDIAL_FIXTURES) + "/" + name; }

Json fixture(const std::string& name) { return parse_json(read_file(fixture_path(name))); }

Database toy_table(std::size_t n, std::uint64_t seed) {
  Database db;
  db.registry = {"name", "area", "price", "stars"};
  db.domains.push_back({"hotel", false, {"name", "area", "price", "stars"}});
  db.apis.push_back({"hotel_find", "hotel", Operation::find, {{"area", false}, {"price", false}, {"stars", false}}, {"name", "area", "price", "stars"}});
  Rng rng(seed);
  const std::vector<std::string> areas{"north", "south", "east", "west"};
  const std::vector<std::string> prices{"cheap", "moderate", "expensive"};
  const std::vector<std::string> stars{"2", "3", "4"};
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.domain = "hotel";
    e.attributes = {{"name", "hotel " + std::to_string(i)},
                    {"area", rng.pick(areas)},
                    {"price", rng.pick(prices)},
                    {"stars", rng.pick(stars)}};
    db.entities["hotel"].push_back(e);
  }
  return db;
}

}  // namespace magdial::testing
