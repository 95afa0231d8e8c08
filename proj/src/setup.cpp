#include "magdial/setup.hpp"

#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"

namespace magdial {

void to_json(Json& j, const WorldConfig& v) {
  j = Json{{"seed", v.seed}, {"scale", v.scale}, {"entity_counts", v.entity_counts}};
}

void from_json(const Json& j, WorldConfig& v) {
  if (!j.is_object()) throw Error(Error::Kind::config, "world config must be an object");
  v.seed = j.value("seed", v.seed);
  v.scale = j.value("scale", v.scale);
  if (j.contains("entity_counts")) v.entity_counts = j.at("entity_counts").get<std::map<DomainName, std::size_t>>();
  if (v.scale <= 0.0) throw Error(Error::Kind::config, "world scale must be positive");
}

World build_world(const WorldConfig& config, std::size_t paraphrase_sets) {
  World w;
  w.db = generate_database(config);
  SeedLibraryOptions options;
  options.paraphrase_sets = paraphrase_sets;
  const auto seeds = seed_library(w.db, options);
  for (std::size_t m = 0; m < paraphrase_sets; ++m) w.manuals.push_back(compile_manual(seeds, m, w.db));
  return w;
}

void to_json(Json& j, const ServiceConfig& v) {
  j = Json{{"goal_seed", v.goal_seed}, {"goals", v.goals}, {"listen", v.listen}};
  j["token_seed"] = v.token_seed ? Json(*v.token_seed) : Json(nullptr);
}

void from_json(const Json& j, ServiceConfig& v) {
  if (!j.is_object()) throw Error(Error::Kind::config, "service config must be an object");
  v.goal_seed = j.value("goal_seed", v.goal_seed);
  v.goals = j.value("goals", v.goals);
  v.listen = j.value("listen", v.listen);
  if (j.contains("token_seed") && !j["token_seed"].is_null()) v.token_seed = j["token_seed"].get<std::uint64_t>();
}

Config parse_config(const Json& document) {
  if (!document.is_object()) throw Error(Error::Kind::config, "config must be an object");
  for (const auto& [key, _] : document.items()) {
    if (key != "world" && key != "goals" && key != "simulator" && key != "corpus" && key != "eval" &&
        key != "service" && key != "version" && key != "kind") {
      throw Error(Error::Kind::config, "unknown config section '" + key + "'");
    }
  }
  Config c;
  try {
    if (document.contains("world")) c.world = document["world"].get<WorldConfig>();
    if (document.contains("goals")) c.goals = document["goals"].get<GoalConfig>();
    if (document.contains("simulator")) c.simulator = document["simulator"].get<SimulatorConfig>();
    c.corpus.goals = c.goals;
    c.corpus.simulator = c.simulator;
    if (document.contains("corpus")) {
      Json corpus = document["corpus"];
      if (!corpus.contains("goals")) corpus["goals"] = c.goals;
      if (!corpus.contains("simulator")) corpus["simulator"] = c.simulator;
      c.corpus = corpus.get<CorpusConfig>();
    }
    if (document.contains("eval")) c.eval = document["eval"].get<PredictorConfig>();
    if (document.contains("service")) c.service = document["service"].get<ServiceConfig>();
  } catch (const Json::exception& e) {
    throw Error(Error::Kind::config, std::string("malformed config: ") + e.what());
  }
  return c;
}

Config load_config(const std::string& path) { return parse_config(parse_json(read_file(path))); }

void to_json(Json& j, const Config& v) {
  j = Json{{"world", v.world}, {"goals", v.goals},   {"simulator", v.simulator},
           {"corpus", v.corpus}, {"eval", v.eval}, {"service", v.service}};
}

}  // namespace magdial
