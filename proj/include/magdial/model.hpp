#pragma once

// Value types shared by every module. All of them are plain aggregates with
// defaulted equality; they are immutable once built and safe to share.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magdial {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxGoalDomains = 4;
inline constexpr std::size_t kMaxSelectedInstructions = 10;

using Attribute = std::string;
using DomainName = std::string;

enum class Speaker { user, agent };
enum class Operation { find, add, edit, remove };
enum class BookingStatus { active, cancelled };

std::string_view to_string(Speaker s);
std::string_view to_string(Operation op);
std::string_view to_string(BookingStatus s);
Speaker speaker_from_string(std::string_view s);
Operation operation_from_string(std::string_view s);
BookingStatus booking_status_from_string(std::string_view s);

// Addresses a byte range inside one stored utterance of a dialogue.
struct Span {
  int turn = 0;
  Speaker speaker = Speaker::user;
  std::size_t begin = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
};

// The 26 attribute names used by the bundled domains.
const std::vector<Attribute>& standard_attributes();

struct DomainSchema {
  DomainName name;
  bool entity_less = false;
  std::vector<Attribute> attributes;

  bool has(std::string_view attribute) const;
  bool operator==(const DomainSchema&) const = default;
};

struct Entity {
  DomainName domain;
  std::map<Attribute, std::string> attributes;

  const std::string* get(std::string_view attribute) const;
  bool operator==(const Entity&) const = default;
};

struct ApiInput {
  Attribute attribute;
  bool required = false;
  bool operator==(const ApiInput&) const = default;
};

struct ApiSpec {
  std::string name;
  DomainName domain;
  Operation operation = Operation::find;
  std::vector<ApiInput> inputs;
  std::vector<Attribute> outputs;

  // 1-based argument index of `attribute`, 0 if it is not an input.
  int input_index(std::string_view attribute) const;
  bool operator==(const ApiSpec&) const = default;
};

struct Database {
  std::vector<Attribute> registry;
  std::vector<DomainSchema> domains;
  std::map<DomainName, std::vector<Entity>> entities;
  // Legal values of attributes that entities do not carry (booking details,
  // taxi places, generated outputs).
  std::map<DomainName, std::map<Attribute, std::vector<std::string>>> value_sets;
  std::vector<ApiSpec> apis;

  const DomainSchema* domain(std::string_view name) const;
  const ApiSpec* api(std::string_view name) const;
  const std::vector<Entity>& entities_of(std::string_view domain) const;
  bool registered(std::string_view attribute) const;
  // Distinct values for (domain, attribute) in first-seen order, entity values
  // first, then the value set.
  std::vector<std::string> values(std::string_view domain, std::string_view attribute) const;

  bool operator==(const Database&) const = default;
};

// Byte range of an attribute mention inside an instruction's API description.
struct Mention {
  Attribute attribute;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Mention&) const = default;
};

struct InstructionApi {
  std::string api;
  std::string description;
  std::vector<Mention> mentions;
  bool operator==(const InstructionApi&) const = default;
};

struct Instruction {
  std::string id;
  std::string family;
  DomainName domain;
  std::string condition;
  std::string solution;
  std::optional<InstructionApi> api;

  // Condition, API description and solution joined by single spaces.
  std::string full_text() const;
  bool operator==(const Instruction&) const = default;
};

struct Manual {
  std::string id;
  std::vector<Instruction> instructions;

  const Instruction* find(std::string_view instruction_id) const;
  bool operator==(const Manual&) const = default;
};

struct Constraint {
  DomainName domain;
  Attribute attribute;
  std::string value;
  bool operator==(const Constraint&) const = default;
};

struct Request {
  DomainName domain;
  Attribute attribute;
  bool operator==(const Request&) const = default;
};

struct UserGoal {
  std::string id;
  std::vector<DomainName> domains;
  std::vector<Constraint> constraints;
  std::vector<Request> requests;

  bool operator==(const UserGoal&) const = default;
};

struct ApiArg {
  Attribute attribute;
  std::string value;
  std::optional<Span> span;
  bool operator==(const ApiArg&) const = default;
};

struct ApiCall {
  std::string api;
  std::optional<std::string> instruction;
  std::vector<ApiArg> args;

  const ApiArg* arg(std::string_view attribute) const;
  bool operator==(const ApiCall&) const = default;
};

struct ApiResult {
  Operation operation = Operation::find;
  // find: matched entities (possibly truncated) and the full match count.
  std::vector<Entity> entities;
  std::size_t count = 0;
  // add/edit/remove: the reservation addressed and its attribute values.
  std::string reference;
  std::string status;
  std::map<Attribute, std::string> values;

  bool operator==(const ApiResult&) const = default;
};

struct ArgumentAnnotation {
  std::string instruction;
  int index = 0;  // 1-based API input index
  Span span;
  bool operator==(const ArgumentAnnotation&) const = default;
};

// A result value that the agent response reports to the user.
struct ResponseValue {
  DomainName domain;
  Attribute attribute;
  std::string value;
  bool operator==(const ResponseValue&) const = default;
};

struct Turn {
  int index = 0;
  std::string user_utterance;
  std::string agent_response;
  std::vector<std::string> selected_instructions;
  std::vector<ApiCall> api_calls;
  std::vector<ApiResult> api_results;
  std::vector<ArgumentAnnotation> argument_annotations;
  std::vector<ResponseValue> response_values;
  bool needs_review = false;

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  UserGoal goal;
  std::string manual_id;
  std::vector<Turn> turns;
  bool completed = false;

  bool operator==(const Dialogue&) const = default;
};

struct CarryoverState {
  std::map<DomainName, std::map<Attribute, std::string>> domains;
  bool operator==(const CarryoverState&) const = default;
};

struct BookingRecord {
  std::string reference;
  DomainName domain;
  std::map<Attribute, std::string> attributes;
  BookingStatus status = BookingStatus::active;
  bool operator==(const BookingRecord&) const = default;
};

// One utterance of a dialogue history D_t.
struct Utterance {
  int turn = 0;
  Speaker speaker = Speaker::user;
  std::string_view text;
};

// D_t for turn `turn_index`: U_1, R_1, ..., U_t. Views into `dialogue`.
std::vector<Utterance> history(const Dialogue& dialogue, int turn_index);

// Text addressed by `span`, or nullopt if the span does not resolve.
std::optional<std::string_view> span_text(const Dialogue& dialogue, const Span& span);

}  // namespace magdial
