#pragma once

// Executes API calls against a read-only Database. Search arguments persist
// per domain across calls (carryover) until overridden or explicitly reset;
// bookings live in a per-session ledger.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "magdial/model.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

struct SessionDbState {
  CarryoverState carryover;
  std::vector<BookingRecord> bookings;
  std::uint64_t ref_counter = 0;
  std::uint64_t seed = 0;

  bool operator==(const SessionDbState&) const = default;
};

struct EngineOptions {
  // Entities returned with a find result; `count` is always the full total.
  std::size_t max_result_entities = 10;
};

// Carryover map for the call's domain overlaid with the call's arguments. The
// state is updated to the returned map.
std::map<Attribute, std::string> effective_query(const Database& db, CarryoverState& state, const ApiCall& call);

ApiResult execute(const ApiCall& call, const Database& db, SessionDbState& state, const EngineOptions& options = {});

void reset_carryover(SessionDbState& state, const DomainName& domain);

// Active bookings, ordered by reference number.
std::vector<BookingRecord> active_bookings(const SessionDbState& state);

// 8 characters: a letter and two base-36 characters derived from the seed,
// then the five-digit zero-padded counter.
std::string reference_number(std::uint64_t seed, std::uint64_t counter);

// Exact-match key used by find: trimmed, NFC, case-folded.
std::string match_key(std::string_view value);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex_digest(std::string_view bytes);
std::uint64_t content_hash(const Database& db);

// One executed call as written to the call log.
struct CallRecord {
  int turn = 0;
  ApiCall call;
  ApiResult result;

  std::string digest() const;
  bool operator==(const CallRecord&) const = default;
};

void to_json(Json& j, const CallRecord& v);
void from_json(const Json& j, CallRecord& v);
void to_json(Json& j, const SessionDbState& v);
void from_json(const Json& j, SessionDbState& v);

}  // namespace magdial
