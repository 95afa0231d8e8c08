#include "magdial/model.hpp"

#include <algorithm>
#include <set>

#include "magdial/error.hpp"

namespace magdial {

const char* kind_name(Error::Kind kind) noexcept {
  switch (kind) {
    case Error::Kind::parse: return "parse";
    case Error::Kind::schema: return "schema";
    case Error::Kind::missing_argument: return "missing_argument";
    case Error::Kind::not_found: return "not_found";
    case Error::Kind::argument: return "argument";
    case Error::Kind::sequencing: return "sequencing";
    case Error::Kind::predictor: return "predictor";
    case Error::Kind::realization: return "realization";
    case Error::Kind::split_leakage: return "split_leakage";
    case Error::Kind::config: return "config";
    case Error::Kind::generation: return "generation";
    case Error::Kind::encoding: return "encoding";
    case Error::Kind::degenerate_input: return "degenerate_input";
    case Error::Kind::compile: return "compile";
    case Error::Kind::validation: return "validation";
    case Error::Kind::unsupported: return "unsupported";
    case Error::Kind::forbidden: return "forbidden";
  }
  return "unknown";
}

std::string_view to_string(Speaker s) { return s == Speaker::user ? "user" : "agent"; }

std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::find: return "find";
    case Operation::add: return "add";
    case Operation::edit: return "edit";
    case Operation::remove: return "delete";
  }
  return "find";
}

std::string_view to_string(BookingStatus s) { return s == BookingStatus::active ? "active" : "cancelled"; }

Speaker speaker_from_string(std::string_view s) {
  if (s == "user") return Speaker::user;
  if (s == "agent") return Speaker::agent;
  throw Error(Error::Kind::schema, "unknown speaker '" + std::string(s) + "'");
}

Operation operation_from_string(std::string_view s) {
  if (s == "find") return Operation::find;
  if (s == "add") return Operation::add;
  if (s == "edit") return Operation::edit;
  if (s == "delete") return Operation::remove;
  throw Error(Error::Kind::schema, "unknown operation '" + std::string(s) + "'");
}

BookingStatus booking_status_from_string(std::string_view s) {
  if (s == "active") return BookingStatus::active;
  if (s == "cancelled") return BookingStatus::cancelled;
  throw Error(Error::Kind::schema, "unknown booking status '" + std::string(s) + "'");
}

const std::vector<Attribute>& standard_attributes() {
  static const std::vector<Attribute> names = {
      "address", "area",  "arrive", "car",   "choice", "class", "day",  "department",     "departure",
      "destination", "facility", "food", "id", "leave", "name", "people", "phone", "postcode",
      "price", "reference num.", "score", "station", "star", "stay", "time", "type"};
  return names;
}

bool DomainSchema::has(std::string_view attribute) const {
  return std::find(attributes.begin(), attributes.end(), attribute) != attributes.end();
}

const std::string* Entity::get(std::string_view attribute) const {
  auto it = attributes.find(std::string(attribute));
  return it == attributes.end() ? nullptr : &it->second;
}

int ApiSpec::input_index(std::string_view attribute) const {
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].attribute == attribute) return static_cast<int>(i) + 1;
  }
  return 0;
}

const DomainSchema* Database::domain(std::string_view name) const {
  for (const auto& d : domains) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const ApiSpec* Database::api(std::string_view name) const {
  for (const auto& a : apis) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const std::vector<Entity>& Database::entities_of(std::string_view domain) const {
  static const std::vector<Entity> empty;
  auto it = entities.find(std::string(domain));
  return it == entities.end() ? empty : it->second;
}

bool Database::registered(std::string_view attribute) const {
  return std::find(registry.begin(), registry.end(), attribute) != registry.end();
}

std::vector<std::string> Database::values(std::string_view domain, std::string_view attribute) const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entities_of(domain)) {
    if (const auto* v = e.get(attribute); v && seen.insert(*v).second) out.push_back(*v);
  }
  if (auto d = value_sets.find(std::string(domain)); d != value_sets.end()) {
    if (auto a = d->second.find(std::string(attribute)); a != d->second.end()) {
      for (const auto& v : a->second) {
        if (seen.insert(v).second) out.push_back(v);
      }
    }
  }
  return out;
}

std::string Instruction::full_text() const {
  std::string out = condition;
  if (api) {
    out += ' ';
    out += api->description;
  }
  out += ' ';
  out += solution;
  return out;
}

const Instruction* Manual::find(std::string_view instruction_id) const {
  for (const auto& i : instructions) {
    if (i.id == instruction_id) return &i;
  }
  return nullptr;
}

const ApiArg* ApiCall::arg(std::string_view attribute) const {
  for (const auto& a : args) {
    if (a.attribute == attribute) return &a;
  }
  return nullptr;
}

std::vector<Utterance> history(const Dialogue& dialogue, int turn_index) {
  std::vector<Utterance> out;
  for (const auto& t : dialogue.turns) {
    if (t.index > turn_index) break;
    out.push_back({t.index, Speaker::user, t.user_utterance});
    if (t.index < turn_index) out.push_back({t.index, Speaker::agent, t.agent_response});
  }
  return out;
}

std::optional<std::string_view> span_text(const Dialogue& dialogue, const Span& span) {
  for (const auto& t : dialogue.turns) {
    if (t.index != span.turn) continue;
    std::string_view text = span.speaker == Speaker::user ? t.user_utterance : t.agent_response;
    if (span.begin > span.end || span.end > text.size()) return std::nullopt;
    return text.substr(span.begin, span.end - span.begin);
  }
  return std::nullopt;
}

}  // namespace magdial
