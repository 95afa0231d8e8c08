#pragma once

#include <string>
#include <vector>

#include "magdial/eval.hpp"
#include "magdial/setup.hpp"

namespace magdial::testing {

// Default world, built once per process.
const World& world();

// 60/20/20 corpus over the default world.
const Corpus& small_corpus();

Json fixture(const std::string& name);
std::string fixture_path(const std::string& name);

// Synthetic single-domain table with `n` entities and one find API over
// area, price and stars.
Database toy_table(std::size_t n, std::uint64_t seed);

}  // namespace magdial::testing
