#include "magdial/api_engine.hpp"

#include <algorithm>

#include "magdial/error.hpp"
#include "magdial/text.hpp"
#include "magdial/validate.hpp"

namespace magdial {
namespace {

constexpr std::string_view kReference = "reference num.";

const ApiSpec& resolve(const ApiCall& call, const Database& db) {
  const auto* spec = db.api(call.api);
  if (!spec) throw Error(Error::Kind::not_found, "unknown api '" + call.api + "'");
  if (auto v = validate(call, db); !v.empty()) {
    throw Error(Error::Kind::schema, call.api + ": " + describe(v));
  }
  return *spec;
}

const DomainSchema& schema_of(const ApiSpec& spec, const Database& db) {
  const auto* schema = db.domain(spec.domain);
  if (!schema) throw Error(Error::Kind::schema, "api '" + spec.name + "' has unknown domain '" + spec.domain + "'");
  return *schema;
}

void check_schema(const ApiCall& call, const DomainSchema& schema) {
  for (const auto& a : call.args) {
    if (!schema.has(a.attribute)) {
      throw Error(Error::Kind::schema, "attribute '" + a.attribute + "' not in schema of " + schema.name);
    }
  }
}

void require_inputs(const ApiCall& call, const ApiSpec& spec) {
  std::vector<std::string> missing;
  for (const auto& in : spec.inputs) {
    if (!in.required) continue;
    const auto* a = call.arg(in.attribute);
    if (!a || text::normalize(a->value).empty()) missing.push_back(in.attribute);
  }
  if (!missing.empty()) {
    throw Error(Error::Kind::missing_argument, spec.name + " missing argument(s): " + text::join(missing, ", "));
  }
}

bool is_range(std::string_view v) {
  auto n = text::normalize(v);
  return !n.empty() && (n[0] == '<' || n[0] == '>' || n.find("..") != std::string::npos);
}

BookingRecord& find_booking(SessionDbState& state, const ApiCall& call, const ApiSpec& spec) {
  const auto* ref = call.arg(kReference);
  if (!ref) throw Error(Error::Kind::missing_argument, spec.name + " missing argument(s): reference num.");
  auto key = match_key(ref->value);
  for (auto& b : state.bookings) {
    if (match_key(b.reference) == key && b.domain == spec.domain) {
      if (b.status == BookingStatus::cancelled) {
        throw Error(Error::Kind::not_found, "booking " + b.reference + " is cancelled");
      }
      return b;
    }
  }
  throw Error(Error::Kind::not_found, "unknown reference number '" + ref->value + "'");
}

// Deterministic pick from a value set for generated outputs such as taxi cars.
std::string generated_value(const Database& db, const std::string& domain, const std::string& attr,
                            std::uint64_t seed, std::uint64_t counter) {
  auto values = db.values(domain, attr);
  if (values.empty()) return {};
  auto h = fnv1a(std::to_string(seed) + "/" + std::to_string(counter) + "/" + attr);
  return values[h % values.size()];
}

}  // namespace

std::string match_key(std::string_view value) { return text::normalize(value); }

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_digest(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  auto h = fnv1a(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::uint64_t content_hash(const Database& db) { return fnv1a(Json(db).dump()); }

std::string reference_number(std::uint64_t seed, std::uint64_t counter) {
  static const char* alphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  auto h = fnv1a("ref/" + std::to_string(seed));
  std::string out(1, alphabet[10 + h % 26]);
  h /= 26;
  for (int i = 0; i < 2; ++i) {
    out += alphabet[h % 36];
    h /= 36;
  }
  std::string digits = std::to_string(counter % 100000);
  out += std::string(5 - digits.size(), '0') + digits;
  return out;
}

std::map<Attribute, std::string> effective_query(const Database& db, CarryoverState& state, const ApiCall& call) {
  const auto& spec = resolve(call, db);
  if (spec.operation != Operation::find) {
    throw Error(Error::Kind::argument, "effective_query requires a find call, got " + spec.name);
  }
  check_schema(call, schema_of(spec, db));
  auto query = state.domains[spec.domain];
  for (const auto& a : call.args) query[a.attribute] = a.value;
  state.domains[spec.domain] = query;
  return query;
}

ApiResult execute(const ApiCall& call, const Database& db, SessionDbState& state, const EngineOptions& options) {
  const auto& spec = resolve(call, db);
  const auto& schema = schema_of(spec, db);
  check_schema(call, schema);

  ApiResult result;
  result.operation = spec.operation;
  switch (spec.operation) {
    case Operation::find: {
      for (const auto& a : call.args) {
        if (is_range(a.value)) throw Error(Error::Kind::unsupported, "range queries are not supported: " + a.value);
      }
      auto query = effective_query(db, state.carryover, call);
      std::vector<std::pair<std::string, std::string>> keys;
      for (const auto& [k, v] : query) keys.emplace_back(k, match_key(v));
      for (const auto& e : db.entities_of(spec.domain)) {
        bool ok = std::all_of(keys.begin(), keys.end(), [&](const auto& kv) {
          const auto* v = e.get(kv.first);
          return v && match_key(*v) == kv.second;
        });
        if (!ok) continue;
        ++result.count;
        if (result.entities.size() < options.max_result_entities) result.entities.push_back(e);
      }
      result.status = "ok";
      break;
    }
    case Operation::add: {
      require_inputs(call, spec);
      if (!schema.entity_less) {
        for (const char* key : {"name", "id"}) {
          const auto* a = call.arg(key);
          if (!a) continue;
          const auto& list = db.entities_of(spec.domain);
          bool exists = std::any_of(list.begin(), list.end(), [&](const Entity& e) {
            const auto* v = e.get(key);
            return v && match_key(*v) == match_key(a->value);
          });
          if (!exists) throw Error(Error::Kind::not_found, "no " + spec.domain + " with " + key + " '" + a->value + "'");
        }
      }
      BookingRecord record;
      record.domain = spec.domain;
      ++state.ref_counter;
      record.reference = reference_number(state.seed, state.ref_counter);
      for (const auto& a : call.args) record.attributes[a.attribute] = a.value;
      for (const auto& out : spec.outputs) {
        if (out == kReference || record.attributes.count(out)) continue;
        auto v = generated_value(db, spec.domain, out, state.seed, state.ref_counter);
        if (!v.empty()) record.attributes[out] = v;
      }
      state.bookings.push_back(record);
      result.reference = record.reference;
      result.status = "booked";
      result.values = record.attributes;
      result.values[std::string(kReference)] = record.reference;
      break;
    }
    case Operation::edit: {
      require_inputs(call, spec);
      auto& record = find_booking(state, call, spec);
      for (const auto& a : call.args) {
        if (a.attribute != kReference) record.attributes[a.attribute] = a.value;
      }
      result.reference = record.reference;
      result.status = "updated";
      result.values = record.attributes;
      result.values[std::string(kReference)] = record.reference;
      break;
    }
    case Operation::remove: {
      auto& record = find_booking(state, call, spec);
      record.status = BookingStatus::cancelled;
      result.reference = record.reference;
      result.status = "cancelled";
      result.values[std::string(kReference)] = record.reference;
      break;
    }
  }
  return result;
}

void reset_carryover(SessionDbState& state, const DomainName& domain) { state.carryover.domains.erase(domain); }

std::vector<BookingRecord> active_bookings(const SessionDbState& state) {
  std::vector<BookingRecord> out;
  for (const auto& b : state.bookings) {
    if (b.status == BookingStatus::active) out.push_back(b);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.reference < b.reference; });
  return out;
}

std::string CallRecord::digest() const { return hex_digest(Json(result).dump()); }

void to_json(Json& j, const CallRecord& v) {
  j = Json{{"turn", v.turn}, {"call", v.call}, {"result", v.result}, {"digest", v.digest()}};
}

void from_json(const Json& j, CallRecord& v) {
  j.at("turn").get_to(v.turn);
  j.at("call").get_to(v.call);
  j.at("result").get_to(v.result);
}

void to_json(Json& j, const SessionDbState& v) {
  j = Json{{"carryover", v.carryover}, {"bookings", v.bookings}, {"ref_counter", v.ref_counter}, {"seed", v.seed}};
}

void from_json(const Json& j, SessionDbState& v) {
  j.at("carryover").get_to(v.carryover);
  j.at("bookings").get_to(v.bookings);
  j.at("ref_counter").get_to(v.ref_counter);
  j.at("seed").get_to(v.seed);
}

}  // namespace magdial
