#pragma once

// Shared construction of the synthetic world: database plus compiled manuals,
// and the structured configuration document read by the command-line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magdial/eval.hpp"
#include "magdial/goal_sampler.hpp"
#include "magdial/simulator.hpp"
#include "magdial/world.hpp"

namespace magdial {

void to_json(Json& j, const WorldConfig& v);
void from_json(const Json& j, WorldConfig& v);

struct World {
  Database db;
  std::vector<Manual> manuals;  // one per paraphrase set, ids m00, m01, ...
};

World build_world(const WorldConfig& config, std::size_t paraphrase_sets = 14);

struct ServiceConfig {
  std::uint64_t goal_seed = 7;
  std::size_t goals = 200;
  std::optional<std::uint64_t> token_seed;
  std::string listen = "127.0.0.1:8080";
};

void to_json(Json& j, const ServiceConfig& v);
void from_json(const Json& j, ServiceConfig& v);

// {"world": {...}, "goals": {...}, "simulator": {...}, "corpus": {...},
//  "eval": {...}, "service": {...}}; every section is optional. The corpus
// section's goals and simulator default to the top-level sections.
struct Config {
  WorldConfig world;
  GoalConfig goals;
  SimulatorConfig simulator;
  CorpusConfig corpus;
  PredictorConfig eval;
  ServiceConfig service;
};

// Throws Error(config) on unknown sections or malformed values.
Config parse_config(const Json& document);
Config load_config(const std::string& path);
void to_json(Json& j, const Config& v);

}  // namespace magdial
