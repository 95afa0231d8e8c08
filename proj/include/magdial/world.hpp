#pragma once

// Seeded synthetic six-domain database with the per-domain shapes of the
// bundled corpus: entity counts, schemas and the API catalogue.

#include <cstdint>
#include <map>
#include <string>

#include "magdial/model.hpp"

namespace magdial {

struct WorldConfig {
  std::uint64_t seed = 20220901;
  // Multiplies the default entity counts; overrides below take precedence.
  double scale = 1.0;
  std::map<DomainName, std::size_t> entity_counts;
};

// attraction 465, hospital 91, hotel 1133, restaurant 951, train 1022, taxi 0.
const std::map<DomainName, std::size_t>& default_entity_counts();
// attraction 90, hospital 43, hotel 80, restaurant 114, train 133, taxi 56.
const std::map<DomainName, std::size_t>& default_instruction_counts();

Database generate_database(const WorldConfig& config);

}  // namespace magdial
