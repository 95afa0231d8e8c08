#include "magdial/rng.hpp"

#include <numeric>

#include "magdial/api_engine.hpp"

namespace magdial {

std::size_t Rng::weighted(const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double x = unit() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = fnv1a(label) ^ (seed * 0x9E3779B97F4A7C15ull);
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ull;
  h ^= h >> 29;
  return h;
}

}  // namespace magdial
