#include "magdial/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "magdial/error.hpp"

namespace magdial {
namespace {

template <class T>
void get_optional(const Json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out.reset();
  } else {
    out = it->get<T>();
  }
}

}  // namespace

void to_json(Json& j, const Span& v) {
  j = Json{{"turn", v.turn}, {"speaker", to_string(v.speaker)}, {"begin", v.begin}, {"end", v.end}};
}
void from_json(const Json& j, Span& v) {
  j.at("turn").get_to(v.turn);
  v.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  j.at("begin").get_to(v.begin);
  j.at("end").get_to(v.end);
}

void to_json(Json& j, const DomainSchema& v) {
  j = Json{{"name", v.name}, {"entity_less", v.entity_less}, {"attributes", v.attributes}};
}
void from_json(const Json& j, DomainSchema& v) {
  j.at("name").get_to(v.name);
  j.at("entity_less").get_to(v.entity_less);
  j.at("attributes").get_to(v.attributes);
}

void to_json(Json& j, const Entity& v) { j = Json{{"domain", v.domain}, {"attributes", v.attributes}}; }
void from_json(const Json& j, Entity& v) {
  j.at("domain").get_to(v.domain);
  j.at("attributes").get_to(v.attributes);
}

void to_json(Json& j, const ApiInput& v) { j = Json{{"attribute", v.attribute}, {"required", v.required}}; }
void from_json(const Json& j, ApiInput& v) {
  j.at("attribute").get_to(v.attribute);
  j.at("required").get_to(v.required);
}

void to_json(Json& j, const ApiSpec& v) {
  j = Json{{"name", v.name},     {"domain", v.domain},   {"operation", to_string(v.operation)},
           {"inputs", v.inputs}, {"outputs", v.outputs}};
}
void from_json(const Json& j, ApiSpec& v) {
  j.at("name").get_to(v.name);
  j.at("domain").get_to(v.domain);
  v.operation = operation_from_string(j.at("operation").get<std::string>());
  j.at("inputs").get_to(v.inputs);
  j.at("outputs").get_to(v.outputs);
}

void to_json(Json& j, const Database& v) {
  j = Json{{"registry", v.registry},
           {"domains", v.domains},
           {"entities", v.entities},
           {"value_sets", v.value_sets},
           {"apis", v.apis}};
}
void from_json(const Json& j, Database& v) {
  j.at("registry").get_to(v.registry);
  j.at("domains").get_to(v.domains);
  j.at("entities").get_to(v.entities);
  j.at("value_sets").get_to(v.value_sets);
  j.at("apis").get_to(v.apis);
}

void to_json(Json& j, const Mention& v) {
  j = Json{{"attribute", v.attribute}, {"begin", v.begin}, {"end", v.end}};
}
void from_json(const Json& j, Mention& v) {
  j.at("attribute").get_to(v.attribute);
  j.at("begin").get_to(v.begin);
  j.at("end").get_to(v.end);
}

void to_json(Json& j, const InstructionApi& v) {
  j = Json{{"api", v.api}, {"description", v.description}, {"mentions", v.mentions}};
}
void from_json(const Json& j, InstructionApi& v) {
  j.at("api").get_to(v.api);
  j.at("description").get_to(v.description);
  j.at("mentions").get_to(v.mentions);
}

void to_json(Json& j, const Instruction& v) {
  j = Json{{"id", v.id},
           {"family", v.family},
           {"domain", v.domain},
           {"condition", v.condition},
           {"solution", v.solution}};
  if (v.api) j["api"] = *v.api;
}
void from_json(const Json& j, Instruction& v) {
  j.at("id").get_to(v.id);
  j.at("family").get_to(v.family);
  j.at("domain").get_to(v.domain);
  j.at("condition").get_to(v.condition);
  j.at("solution").get_to(v.solution);
  get_optional(j, "api", v.api);
}

void to_json(Json& j, const Manual& v) { j = Json{{"id", v.id}, {"instructions", v.instructions}}; }
void from_json(const Json& j, Manual& v) {
  j.at("id").get_to(v.id);
  j.at("instructions").get_to(v.instructions);
}

void to_json(Json& j, const Constraint& v) {
  j = Json{{"domain", v.domain}, {"attribute", v.attribute}, {"value", v.value}};
}
void from_json(const Json& j, Constraint& v) {
  j.at("domain").get_to(v.domain);
  j.at("attribute").get_to(v.attribute);
  j.at("value").get_to(v.value);
}

void to_json(Json& j, const Request& v) { j = Json{{"domain", v.domain}, {"attribute", v.attribute}}; }
void from_json(const Json& j, Request& v) {
  j.at("domain").get_to(v.domain);
  j.at("attribute").get_to(v.attribute);
}

void to_json(Json& j, const UserGoal& v) {
  j = Json{{"id", v.id}, {"domains", v.domains}, {"constraints", v.constraints}, {"requests", v.requests}};
}
void from_json(const Json& j, UserGoal& v) {
  j.at("id").get_to(v.id);
  j.at("domains").get_to(v.domains);
  j.at("constraints").get_to(v.constraints);
  j.at("requests").get_to(v.requests);
}

void to_json(Json& j, const ApiArg& v) {
  j = Json{{"attribute", v.attribute}, {"value", v.value}};
  if (v.span) j["span"] = *v.span;
}
void from_json(const Json& j, ApiArg& v) {
  j.at("attribute").get_to(v.attribute);
  j.at("value").get_to(v.value);
  get_optional(j, "span", v.span);
}

void to_json(Json& j, const ApiCall& v) {
  j = Json{{"api", v.api}, {"args", v.args}};
  if (v.instruction) j["instruction"] = *v.instruction;
}
void from_json(const Json& j, ApiCall& v) {
  j.at("api").get_to(v.api);
  j.at("args").get_to(v.args);
  get_optional(j, "instruction", v.instruction);
}

void to_json(Json& j, const ApiResult& v) {
  j = Json{{"operation", to_string(v.operation)},
           {"entities", v.entities},
           {"count", v.count},
           {"reference", v.reference},
           {"status", v.status},
           {"values", v.values}};
}
void from_json(const Json& j, ApiResult& v) {
  v.operation = operation_from_string(j.at("operation").get<std::string>());
  j.at("entities").get_to(v.entities);
  j.at("count").get_to(v.count);
  j.at("reference").get_to(v.reference);
  j.at("status").get_to(v.status);
  j.at("values").get_to(v.values);
}

void to_json(Json& j, const ArgumentAnnotation& v) {
  j = Json{{"instruction", v.instruction}, {"index", v.index}, {"span", v.span}};
}
void from_json(const Json& j, ArgumentAnnotation& v) {
  j.at("instruction").get_to(v.instruction);
  j.at("index").get_to(v.index);
  j.at("span").get_to(v.span);
}

void to_json(Json& j, const ResponseValue& v) {
  j = Json{{"domain", v.domain}, {"attribute", v.attribute}, {"value", v.value}};
}
void from_json(const Json& j, ResponseValue& v) {
  j.at("domain").get_to(v.domain);
  j.at("attribute").get_to(v.attribute);
  j.at("value").get_to(v.value);
}

void to_json(Json& j, const Turn& v) {
  j = Json{{"index", v.index},
           {"user", v.user_utterance},
           {"agent", v.agent_response},
           {"instructions", v.selected_instructions},
           {"api_calls", v.api_calls},
           {"api_results", v.api_results},
           {"arguments", v.argument_annotations},
           {"response_values", v.response_values},
           {"needs_review", v.needs_review}};
}
void from_json(const Json& j, Turn& v) {
  j.at("index").get_to(v.index);
  j.at("user").get_to(v.user_utterance);
  j.at("agent").get_to(v.agent_response);
  j.at("instructions").get_to(v.selected_instructions);
  j.at("api_calls").get_to(v.api_calls);
  j.at("api_results").get_to(v.api_results);
  j.at("arguments").get_to(v.argument_annotations);
  j.at("response_values").get_to(v.response_values);
  j.at("needs_review").get_to(v.needs_review);
}

void to_json(Json& j, const Dialogue& v) {
  j = Json{{"id", v.id}, {"goal", v.goal}, {"manual", v.manual_id}, {"turns", v.turns}, {"completed", v.completed}};
}
void from_json(const Json& j, Dialogue& v) {
  j.at("id").get_to(v.id);
  j.at("goal").get_to(v.goal);
  j.at("manual").get_to(v.manual_id);
  j.at("turns").get_to(v.turns);
  j.at("completed").get_to(v.completed);
}

void to_json(Json& j, const CarryoverState& v) { j = Json(v.domains); }
void from_json(const Json& j, CarryoverState& v) { j.get_to(v.domains); }

void to_json(Json& j, const BookingRecord& v) {
  j = Json{{"reference", v.reference},
           {"domain", v.domain},
           {"attributes", v.attributes},
           {"status", to_string(v.status)}};
}
void from_json(const Json& j, BookingRecord& v) {
  j.at("reference").get_to(v.reference);
  j.at("domain").get_to(v.domain);
  j.at("attributes").get_to(v.attributes);
  v.status = booking_status_from_string(j.at("status").get<std::string>());
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(e.byte, "malformed JSON");
  }
}

Json make_document(std::string_view kind, Json body) {
  return Json{{"schema_version", kSchemaVersion}, {"kind", kind}, {"body", std::move(body)}};
}

Json open_document(const Json& doc, std::string_view kind) {
  if (!doc.is_object()) throw ParseError(0, "document is not an object");
  auto v = doc.find("schema_version");
  if (v == doc.end() || !v->is_number_integer()) throw ParseError(0, "missing schema_version");
  if (v->get<int>() != kSchemaVersion) {
    throw ParseError(0, "unsupported schema_version " + std::to_string(v->get<int>()));
  }
  auto k = doc.find("kind");
  if (k == doc.end() || !k->is_string() || k->get<std::string>() != kind) {
    throw ParseError(0, "expected document kind '" + std::string(kind) + "'");
  }
  auto b = doc.find("body");
  if (b == doc.end()) throw ParseError(0, "missing body");
  return *b;
}

template <class T>
T deserialize(std::string_view text) {
  Json body = open_document(parse_json(text), DocumentKind<T>::name);
  try {
    return body.get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(0, std::string("invalid ") + DocumentKind<T>::name + ": " + e.what());
  } catch (const Error& e) {
    throw ParseError(0, std::string("invalid ") + DocumentKind<T>::name + ": " + e.what());
  }
}

template Database deserialize<Database>(std::string_view);
template Manual deserialize<Manual>(std::string_view);
template UserGoal deserialize<UserGoal>(std::string_view);
template std::vector<UserGoal> deserialize<std::vector<UserGoal>>(std::string_view);
template std::vector<Manual> deserialize<std::vector<Manual>>(std::string_view);
template Dialogue deserialize<Dialogue>(std::string_view);

void write_corpus(std::ostream& out, const std::vector<Dialogue>& dialogues) {
  for (const auto& d : dialogues) out << serialize(d) << '\n';
}

std::vector<Dialogue> read_corpus(std::istream& in) {
  std::vector<Dialogue> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      try {
        out.push_back(deserialize<Dialogue>(line));
      } catch (const ParseError& e) {
        throw ParseError(offset + e.byte_offset(), "corpus record " + std::to_string(out.size() + 1) + ": " + e.what());
      }
    }
    offset += line.size() + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Kind::not_found, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Kind::argument, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<Dialogue> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Kind::not_found, "cannot open " + path);
  return read_corpus(in);
}

void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Kind::argument, "cannot write " + path);
  write_corpus(out, dialogues);
}

}  // namespace magdial
