#pragma once

// Agent responses from selected instructions and API results. The quoted
// reply of each instruction's solution is the surface template; {attr}
// placeholders are filled from the instruction's API result or, failing that,
// from the carryover query of its domain.

#include <cstdint>
#include <string>
#include <vector>

#include "magdial/api_engine.hpp"
#include "magdial/model.hpp"

namespace magdial {

struct Realization {
  std::string text;
  // Every substituted value, in order of appearance.
  std::vector<ResponseValue> values;
};

// calls[i] produced results[i]; a call is tied to the instruction named in
// ApiCall::instruction. Throws Error(realization) naming the attribute when a
// placeholder has no value.
Realization realize(const std::vector<const Instruction*>& selected, const std::vector<ApiCall>& calls,
                    const std::vector<ApiResult>& results, const CarryoverState& carryover, std::uint64_t seed);

// Reply used for a find without matches.
std::string no_result_reply(const DomainName& domain);

// Placeholders ({attr}) of a reply template in order.
std::vector<Attribute> placeholders(std::string_view reply);

}  // namespace magdial
