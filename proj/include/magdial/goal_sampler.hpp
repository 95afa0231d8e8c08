#pragma once

// Multi-domain user goals: sampling with compatibility rules, rendering to a
// description plus checklist, and parsing the checklist back.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "magdial/model.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

struct GoalConfig {
  // Weights for 1, 2, 3, ... domains; truncated to max_domains.
  std::vector<double> domain_count_weights{0.2, 0.35, 0.3, 0.15};
  std::size_t max_domains = kMaxGoalDomains;
  // Empty means every domain of the database.
  std::vector<DomainName> domains;

  // Search constraints per entity domain (before the train rule is applied).
  std::size_t min_constraints = 1;
  std::size_t max_constraints = 3;
  // Information requests per domain.
  std::size_t min_requests = 0;
  std::size_t max_requests = 2;

  // Probability that a bookable entity domain includes a reservation, and that
  // each editable booking attribute is later changed.
  double booking_probability = 0.5;
  double edit_probability = 0.2;

  // Compatibility rules.
  std::set<Attribute> request_only{"reference num.", "phone", "address", "postcode", "id"};
  std::set<Attribute> never_sampled{"choice", "name"};
  bool taxi_requires_route = true;
  bool train_requires_day_and_route = true;
};

void to_json(Json& j, const GoalConfig& v);
void from_json(const Json& j, GoalConfig& v);

// Throws Error(config) when the configuration cannot be satisfied.
UserGoal sample_goal(const Database& db, std::uint64_t seed, const GoalConfig& config = {});

// `count` pairwise-distinct goals with ids g0000, g0001, ...; throws
// Error(generation) if the configuration cannot produce that many.
std::vector<UserGoal> sample_goals(const Database& db, std::uint64_t seed, std::size_t count,
                                   const GoalConfig& config = {});

struct Checklist {
  std::vector<Constraint> check;
  std::vector<Request> fill;
  bool operator==(const Checklist&) const = default;
};

struct RenderedGoal {
  std::string description;
  Checklist checklist;
  // Plain-text table, one line per item: "check<TAB>domain<TAB>attribute<TAB>value"
  // or "fill<TAB>domain<TAB>attribute".
  std::string table;
};

RenderedGoal render_goal(const UserGoal& goal);

// Inverse of RenderedGoal::table. Throws ParseError on malformed lines.
Checklist parse_checklist(std::string_view table);

void to_json(Json& j, const Checklist& v);

// Search and booking attributes of a domain as derived from its APIs.
struct DomainCapabilities {
  std::vector<Attribute> searchable;
  std::vector<Attribute> requestable;  // lookup outputs
  std::vector<Attribute> booking;      // add inputs without entity keys
  std::vector<Attribute> booking_outputs;
  std::vector<Attribute> editable;
  bool bookable = false;
  bool cancellable = false;
};

DomainCapabilities capabilities(const Database& db, const DomainName& domain);

}  // namespace magdial
