#pragma once

#include <string>
#include <vector>

#include "magdial/model.hpp"

namespace magdial {

struct Violation {
  std::string field;
  std::string rule;
  bool operator==(const Violation&) const = default;
};

using Violations = std::vector<Violation>;

Violations validate(const Database& db);
Violations validate(const Instruction& instruction, const Database& db);
Violations validate(const Manual& manual, const Database& db);
Violations validate(const UserGoal& goal, const Database& db);
Violations validate(const ApiCall& call, const Database& db);
Violations validate(const CarryoverState& state, const Database& db);
// Checks the turn against the dialogue it belongs to (span addressing).
Violations validate(const Turn& turn, const Dialogue& dialogue, const Database& db, const Manual* manual);
// `manual` may be null when the dialogue's manual is not at hand; instruction
// references are then not resolved.
Violations validate(const Dialogue& dialogue, const Database& db, const Manual* manual);

std::string describe(const Violations& violations);

}  // namespace magdial
