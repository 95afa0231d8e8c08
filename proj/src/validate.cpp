#include "magdial/validate.hpp"

#include <algorithm>
#include <set>

#include "magdial/text.hpp"

namespace magdial {
namespace {

void add(Violations& out, std::string field, std::string rule) {
  out.push_back({std::move(field), std::move(rule)});
}

void prefix(Violations& out, const Violations& inner, const std::string& path) {
  for (const auto& v : inner) out.push_back({path + "." + v.field, v.rule});
}

bool entity_in_db(const Entity& e, const Database& db) {
  const auto& list = db.entities_of(e.domain);
  return std::find(list.begin(), list.end(), e) != list.end();
}

}  // namespace

Violations validate(const Database& db) {
  Violations out;
  std::set<std::string> names;
  for (const auto& a : db.registry) {
    if (!names.insert(a).second) add(out, "registry", "duplicate attribute '" + a + "'");
  }
  std::set<std::string> domains;
  for (std::size_t i = 0; i < db.domains.size(); ++i) {
    const auto& d = db.domains[i];
    std::string path = "domains[" + std::to_string(i) + "]";
    if (!domains.insert(d.name).second) add(out, path, "duplicate domain '" + d.name + "'");
    if (d.attributes.empty()) add(out, path + ".attributes", "empty schema");
    for (const auto& a : d.attributes) {
      if (!db.registered(a)) add(out, path + ".attributes", "unregistered attribute '" + a + "'");
    }
    if (d.entity_less && !db.entities_of(d.name).empty()) add(out, path, "entity-less domain has entities");
  }
  for (const auto& [domain, list] : db.entities) {
    const auto* schema = db.domain(domain);
    if (!schema) {
      add(out, "entities." + domain, "unknown domain");
      continue;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string path = "entities." + domain + "[" + std::to_string(i) + "]";
      if (list[i].domain != domain) add(out, path + ".domain", "entity filed under the wrong domain");
      if (!schema->entity_less && !list[i].get("name")) add(out, path, "missing name attribute");
      for (const auto& [k, v] : list[i].attributes) {
        if (!schema->has(k)) add(out, path + ".attributes", "attribute '" + k + "' not in domain schema");
      }
    }
  }
  for (const auto& [domain, sets] : db.value_sets) {
    const auto* schema = db.domain(domain);
    for (const auto& [attr, values] : sets) {
      if (!schema || !schema->has(attr)) add(out, "value_sets." + domain, "attribute '" + attr + "' not in domain schema");
    }
  }
  std::set<std::string> apis;
  for (std::size_t i = 0; i < db.apis.size(); ++i) {
    const auto& api = db.apis[i];
    std::string path = "apis[" + std::to_string(i) + "]";
    if (!apis.insert(api.name).second) add(out, path, "duplicate api '" + api.name + "'");
    const auto* schema = db.domain(api.domain);
    if (!schema) {
      add(out, path + ".domain", "unknown domain '" + api.domain + "'");
      continue;
    }
    std::set<std::string> seen;
    for (const auto& in : api.inputs) {
      if (!schema->has(in.attribute)) add(out, path + ".inputs", "attribute '" + in.attribute + "' not in domain schema");
      if (!seen.insert(in.attribute).second) add(out, path + ".inputs", "duplicate input '" + in.attribute + "'");
    }
    for (const auto& o : api.outputs) {
      if (!schema->has(o)) add(out, path + ".outputs", "attribute '" + o + "' not in domain schema");
    }
  }
  return out;
}

Violations validate(const Instruction& instruction, const Database& db) {
  Violations out;
  if (instruction.id.empty()) add(out, "id", "empty id");
  if (instruction.family.empty()) add(out, "family", "empty family");
  if (instruction.condition.empty()) add(out, "condition", "empty condition");
  if (instruction.solution.empty()) add(out, "solution", "empty solution");
  if (!db.domain(instruction.domain)) add(out, "domain", "unknown domain '" + instruction.domain + "'");
  if (instruction.api) {
    const auto& ia = *instruction.api;
    const auto* spec = db.api(ia.api);
    if (!spec) {
      add(out, "api.api", "unknown api '" + ia.api + "'");
      return out;
    }
    if (ia.mentions.size() != spec->inputs.size()) {
      add(out, "api.mentions", "mention count " + std::to_string(ia.mentions.size()) + " != input count " +
                                   std::to_string(spec->inputs.size()));
    }
    for (std::size_t i = 0; i < ia.mentions.size(); ++i) {
      const auto& m = ia.mentions[i];
      if (i < spec->inputs.size() && m.attribute != spec->inputs[i].attribute) {
        add(out, "api.mentions[" + std::to_string(i) + "]", "mention order differs from input order");
      }
      if (m.begin >= m.end || m.end > ia.description.size()) {
        add(out, "api.mentions[" + std::to_string(i) + "]", "span outside description");
      }
    }
  }
  return out;
}

Violations validate(const Manual& manual, const Database& db) {
  Violations out;
  if (manual.id.empty()) add(out, "id", "empty id");
  std::set<std::string> ids, families;
  for (std::size_t i = 0; i < manual.instructions.size(); ++i) {
    const auto& ins = manual.instructions[i];
    std::string path = "instructions[" + std::to_string(i) + "]";
    if (!ids.insert(ins.id).second) add(out, path + ".id", "duplicate instruction id '" + ins.id + "'");
    if (!families.insert(ins.family).second) add(out, path + ".family", "family appears twice in manual");
    prefix(out, validate(ins, db), path);
  }
  return out;
}

Violations validate(const UserGoal& goal, const Database& db) {
  Violations out;
  if (goal.domains.empty()) add(out, "domains", "domains empty");
  if (goal.domains.size() > kMaxGoalDomains) add(out, "domains", "domains > 4");
  std::set<std::string> doms;
  for (const auto& d : goal.domains) {
    if (!doms.insert(d).second) add(out, "domains", "duplicate domain '" + d + "'");
    if (!db.domain(d)) add(out, "domains", "unknown domain '" + d + "'");
  }
  std::set<std::pair<std::string, std::string>> constrained, requested;
  for (std::size_t i = 0; i < goal.constraints.size(); ++i) {
    const auto& c = goal.constraints[i];
    std::string path = "constraints[" + std::to_string(i) + "]";
    if (!doms.count(c.domain)) add(out, path, "domain not in goal");
    const auto* schema = db.domain(c.domain);
    if (!schema || !schema->has(c.attribute)) {
      add(out, path, "attribute '" + c.attribute + "' not in domain schema");
      continue;
    }
    if (!constrained.insert({c.domain, c.attribute}).second) add(out, path, "duplicate constraint attribute");
    if (!schema->entity_less) {
      auto values = db.values(c.domain, c.attribute);
      if (std::find(values.begin(), values.end(), c.value) == values.end()) {
        add(out, path + ".value", "value '" + c.value + "' not in database");
      }
    }
  }
  for (std::size_t i = 0; i < goal.requests.size(); ++i) {
    const auto& r = goal.requests[i];
    std::string path = "requests[" + std::to_string(i) + "]";
    if (!doms.count(r.domain)) add(out, path, "domain not in goal");
    const auto* schema = db.domain(r.domain);
    if (!schema || !schema->has(r.attribute)) add(out, path, "attribute '" + r.attribute + "' not in domain schema");
    if (!requested.insert({r.domain, r.attribute}).second) add(out, path, "duplicate request attribute");
    if (constrained.count({r.domain, r.attribute})) add(out, path, "C/R overlap");
  }
  return out;
}

Violations validate(const ApiCall& call, const Database& db) {
  Violations out;
  const auto* spec = db.api(call.api);
  if (!spec) {
    add(out, "api", "unknown api '" + call.api + "'");
    return out;
  }
  int last = 0;
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    int idx = spec->input_index(call.args[i].attribute);
    std::string path = "args[" + std::to_string(i) + "]";
    if (idx == 0) {
      add(out, path, "attribute '" + call.args[i].attribute + "' is not an input of " + spec->name);
      continue;
    }
    if (idx <= last) add(out, path, "argument order differs from input order");
    last = idx;
  }
  return out;
}

Violations validate(const CarryoverState& state, const Database& db) {
  Violations out;
  for (const auto& [domain, attrs] : state.domains) {
    const auto* schema = db.domain(domain);
    if (!schema) {
      add(out, domain, "unknown domain");
      continue;
    }
    for (const auto& [k, v] : attrs) {
      if (!schema->has(k)) add(out, domain, "attribute '" + k + "' not valid for domain");
    }
  }
  return out;
}

Violations validate(const Turn& turn, const Dialogue& dialogue, const Database& db, const Manual* manual) {
  Violations out;
  if (turn.selected_instructions.size() > kMaxSelectedInstructions) {
    add(out, "instructions", "more than 10 selected instructions");
  }
  std::set<std::string> selected;
  for (const auto& id : turn.selected_instructions) {
    if (!selected.insert(id).second) add(out, "instructions", "instruction '" + id + "' selected twice");
    if (manual && !manual->find(id)) add(out, "instructions", "unknown instruction '" + id + "'");
  }
  if (turn.api_results.size() != turn.api_calls.size()) add(out, "api_results", "not aligned with api_calls");
  for (std::size_t i = 0; i < turn.api_calls.size(); ++i) {
    prefix(out, validate(turn.api_calls[i], db), "api_calls[" + std::to_string(i) + "]");
    if (i < turn.api_results.size()) {
      const auto* spec = db.api(turn.api_calls[i].api);
      const auto& res = turn.api_results[i];
      if (spec && res.operation != spec->operation) {
        add(out, "api_results[" + std::to_string(i) + "]", "operation differs from api");
      }
      for (const auto& e : res.entities) {
        if (!entity_in_db(e, db)) add(out, "api_results[" + std::to_string(i) + "]", "entity not in database");
      }
      if (res.entities.size() > res.count) add(out, "api_results[" + std::to_string(i) + "]", "more entities than count");
    }
  }
  auto span_ok = [&](const Span& s) {
    bool before = s.turn < turn.index || (s.turn == turn.index && s.speaker == Speaker::user);
    return before && span_text(dialogue, s).has_value() && s.begin < s.end;
  };
  for (std::size_t i = 0; i < turn.argument_annotations.size(); ++i) {
    const auto& a = turn.argument_annotations[i];
    std::string path = "arguments[" + std::to_string(i) + "]";
    if (!span_ok(a.span)) add(out, path + ".span", "span outside dialogue history");
    if (a.index < 1) add(out, path + ".index", "argument index < 1");
    if (manual) {
      const auto* ins = manual->find(a.instruction);
      if (!ins) {
        add(out, path + ".instruction", "unknown instruction '" + a.instruction + "'");
      } else if (ins->api) {
        const auto* spec = db.api(ins->api->api);
        if (spec && a.index > static_cast<int>(spec->inputs.size())) add(out, path + ".index", "index exceeds input count");
      } else {
        add(out, path + ".instruction", "instruction has no api");
      }
    }
  }
  for (std::size_t i = 0; i < turn.api_calls.size(); ++i) {
    for (const auto& arg : turn.api_calls[i].args) {
      if (arg.span && !span_ok(*arg.span)) {
        add(out, "api_calls[" + std::to_string(i) + "].args", "provenance span outside dialogue history");
      }
    }
  }
  return out;
}

Violations validate(const Dialogue& dialogue, const Database& db, const Manual* manual) {
  Violations out;
  if (dialogue.id.empty()) add(out, "id", "empty id");
  if (manual && manual->id != dialogue.manual_id) add(out, "manual", "manual id mismatch");
  prefix(out, validate(dialogue.goal, db), "goal");
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const auto& t = dialogue.turns[i];
    std::string path = "turns[" + std::to_string(i) + "]";
    if (t.index != static_cast<int>(i)) add(out, path + ".index", "turn index out of sequence");
    prefix(out, validate(t, dialogue, db, manual), path);
  }
  if (dialogue.completed) {
    for (const auto& c : dialogue.goal.constraints) {
      auto needle = text::normalize(c.value);
      bool expressed = std::any_of(dialogue.turns.begin(), dialogue.turns.end(), [&](const Turn& t) {
        return text::normalize(t.user_utterance).find(needle) != std::string::npos;
      });
      if (!expressed) add(out, "completed", "constraint " + c.domain + "." + c.attribute + " never expressed");
    }
    for (const auto& r : dialogue.goal.requests) {
      bool answered = std::any_of(dialogue.turns.begin(), dialogue.turns.end(), [&](const Turn& t) {
        return std::any_of(t.response_values.begin(), t.response_values.end(), [&](const ResponseValue& v) {
          return v.domain == r.domain && v.attribute == r.attribute &&
                 t.agent_response.find(v.value) != std::string::npos;
        });
      });
      if (!answered) add(out, "completed", "request " + r.domain + "." + r.attribute + " never answered");
    }
  }
  return out;
}

std::string describe(const Violations& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.field + ": " + v.rule;
  }
  return out;
}

}  // namespace magdial
