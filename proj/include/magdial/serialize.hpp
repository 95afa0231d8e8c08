#pragma once

// Canonical JSON forms. Every document carries "schema_version" and "kind";
// corpora are one dialogue record per line.

#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "magdial/model.hpp"

namespace magdial {

using Json = nlohmann::json;

void to_json(Json& j, const Span& v);
void from_json(const Json& j, Span& v);
void to_json(Json& j, const DomainSchema& v);
void from_json(const Json& j, DomainSchema& v);
void to_json(Json& j, const Entity& v);
void from_json(const Json& j, Entity& v);
void to_json(Json& j, const ApiInput& v);
void from_json(const Json& j, ApiInput& v);
void to_json(Json& j, const ApiSpec& v);
void from_json(const Json& j, ApiSpec& v);
void to_json(Json& j, const Database& v);
void from_json(const Json& j, Database& v);
void to_json(Json& j, const Mention& v);
void from_json(const Json& j, Mention& v);
void to_json(Json& j, const InstructionApi& v);
void from_json(const Json& j, InstructionApi& v);
void to_json(Json& j, const Instruction& v);
void from_json(const Json& j, Instruction& v);
void to_json(Json& j, const Manual& v);
void from_json(const Json& j, Manual& v);
void to_json(Json& j, const Constraint& v);
void from_json(const Json& j, Constraint& v);
void to_json(Json& j, const Request& v);
void from_json(const Json& j, Request& v);
void to_json(Json& j, const UserGoal& v);
void from_json(const Json& j, UserGoal& v);
void to_json(Json& j, const ApiArg& v);
void from_json(const Json& j, ApiArg& v);
void to_json(Json& j, const ApiCall& v);
void from_json(const Json& j, ApiCall& v);
void to_json(Json& j, const ApiResult& v);
void from_json(const Json& j, ApiResult& v);
void to_json(Json& j, const ArgumentAnnotation& v);
void from_json(const Json& j, ArgumentAnnotation& v);
void to_json(Json& j, const ResponseValue& v);
void from_json(const Json& j, ResponseValue& v);
void to_json(Json& j, const Turn& v);
void from_json(const Json& j, Turn& v);
void to_json(Json& j, const Dialogue& v);
void from_json(const Json& j, Dialogue& v);
void to_json(Json& j, const CarryoverState& v);
void from_json(const Json& j, CarryoverState& v);
void to_json(Json& j, const BookingRecord& v);
void from_json(const Json& j, BookingRecord& v);

// Parses JSON text; syntax errors become ParseError with the byte offset.
Json parse_json(std::string_view text);

// Wraps `body` as a versioned document of the given kind.
Json make_document(std::string_view kind, Json body);
// Checks version and kind, returns the body.
Json open_document(const Json& doc, std::string_view kind);

template <class T>
struct DocumentKind;
template <> struct DocumentKind<Database> { static constexpr const char* name = "database"; };
template <> struct DocumentKind<Manual> { static constexpr const char* name = "manual"; };
template <> struct DocumentKind<UserGoal> { static constexpr const char* name = "goal"; };
template <> struct DocumentKind<std::vector<UserGoal>> { static constexpr const char* name = "goal_set"; };
template <> struct DocumentKind<std::vector<Manual>> { static constexpr const char* name = "manual_set"; };
template <> struct DocumentKind<Dialogue> { static constexpr const char* name = "dialogue"; };

template <class T>
std::string serialize(const T& value) {
  const bool line = std::is_same_v<T, Dialogue>;
  return make_document(DocumentKind<T>::name, Json(value)).dump(line ? -1 : 1);
}

// Converts a structural mismatch into a ParseError; never returns a partial
// object.
template <class T>
T deserialize(std::string_view text);

extern template Database deserialize<Database>(std::string_view);
extern template Manual deserialize<Manual>(std::string_view);
extern template UserGoal deserialize<UserGoal>(std::string_view);
extern template std::vector<UserGoal> deserialize<std::vector<UserGoal>>(std::string_view);
extern template std::vector<Manual> deserialize<std::vector<Manual>>(std::string_view);
extern template Dialogue deserialize<Dialogue>(std::string_view);

// One serialized dialogue per line.
void write_corpus(std::ostream& out, const std::vector<Dialogue>& dialogues);
std::vector<Dialogue> read_corpus(std::istream& in);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

template <class T>
T load(const std::string& path) {
  return deserialize<T>(read_file(path));
}

std::vector<Dialogue> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues);

}  // namespace magdial
