#include "magdial/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>

#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/text.hpp"
#include "magdial/validate.hpp"

namespace magdial {

// ---- utterance pack --------------------------------------------------------

void to_json(Json& j, const UtterancePack& v) {
  j = Json{{"acts", v.acts}, {"phrases", v.phrases}, {"words", v.words}, {"domains", v.domains}};
}

void from_json(const Json& j, UtterancePack& v) {
  const auto& d = default_pack();
  v.acts = j.value("acts", d.acts);
  v.phrases = j.value("phrases", d.phrases);
  v.words = j.value("words", d.words);
  v.domains = j.value("domains", d.domains);
}

const UtterancePack& default_pack() {
  static const UtterancePack pack = [] {
    UtterancePack p;
    p.acts = {
        {"greet", {"Hello!", "Hi there.", "Good morning.", "Hello, I need some help."}},
        {"bye", {"Thank you, that is all I need. Goodbye!", "Great, thanks for your help. Bye!",
                 "That is everything. Have a nice day!", "Thanks a lot, goodbye."}},
        {"inform", {"I am looking for a {dom} {c}.", "Can you find me a {dom} {c}?", "I need a {dom} {c}.",
                    "Please help me find a {dom} {c}.", "Is there a {dom} {c}?"}},
        {"inform_more", {"It should also be {c}.", "I would like it {c} as well.", "Make sure it is {c}.",
                         "One more thing, it has to be {c}."}},
        {"request", {"Could you tell me its {m}?", "What is its {m}?", "Can I get the {m}?",
                     "I would like to know the {m}."}},
        {"request_named", {"What is the {m} of {name}?", "Could you tell me the {m} of {name}?",
                           "Please give me the {m} of {name}."}},
        {"request2", {"Could you tell me its {m1} and {m2}?", "What are its {m1} and {m2}?",
                      "Can I get the {m1} and the {m2}?"}},
        {"request2_named", {"What are the {m1} and {m2} of {name}?", "Please give me the {m1} and {m2} of {name}."}},
        {"book", {"Please book it {c}.", "I would like to reserve it {c}.", "Go ahead and book it {c}.",
                  "Can you make a reservation {c}?"}},
        {"book_named", {"Please book {name} {c}.", "I would like to reserve {name} {c}.",
                        "Can you book {name} {c}?"}},
        {"book_taxi", {"I need a taxi {c}.", "Please book a taxi {c}.", "Can you get me a taxi {c}?"}},
        {"edit", {"Please change the {m} of my {dom} booking to {v}.", "Could you update the {m} to {v}?",
                  "Actually, I need the {m} changed to {v}.", "Can you set the {m} of the {dom} booking to {v}?"}},
        {"cancel", {"Please cancel the {dom} booking {ref}.", "I want to cancel reservation {ref}.",
                    "Could you cancel booking {ref} for me?"}},
        {"rebook", {"Sorry, I changed my mind again. Please book it {c}.",
                    "On second thought, reserve it again {c}."}},
        {"agent_greet", {"Hello, how can I help you?", "Hi, what can I do for you?"}},
        {"agent_bye", {"You are welcome. Goodbye!", "Glad I could help. Have a nice day!"}},
        {"agent_fallback", {"Sorry, could you say that again?", "I am not sure I understood. Could you rephrase?"}},
    };
    p.phrases = {
        {"area", {"in the {v}", "in the {v} area", "located in the {v}"}},
        {"price", {"in the {v} price range", "that is {v}", "with a {v} price"}},
        {"type", {"of the {v} type", "which is a {v}", "of type {v}"}},
        {"star", {"with {v} stars", "rated {v} stars"}},
        {"facility", {"with {v}", "that offers {v}"}},
        {"food", {"serving {v} food", "with {v} cuisine", "that serves {v} dishes"}},
        {"station", {"near {v}", "close to {v}"}},
        {"department", {"with a {v} department", "that has {v}"}},
        {"departure", {"from {v}", "leaving from {v}"}},
        {"destination", {"to {v}", "going to {v}"}},
        {"day", {"on {v}"}},
        {"leave", {"leaving after {v}", "departing after {v}"}},
        {"arrive", {"arriving by {v}", "that arrives by {v}"}},
        {"people", {"for {v} people", "for a party of {v}"}},
        {"time", {"at {v}"}},
        {"stay", {"for {v} nights"}},
    };
    p.words = {
        {"address", {"address", "street address"}},
        {"phone", {"phone number", "telephone number"}},
        {"postcode", {"postcode", "zip code"}},
        {"price", {"price", "price range"}},
        {"people", {"number of people", "party size"}},
        {"stay", {"number of nights", "length of stay"}},
        {"leave", {"leaving time", "departure time"}},
        {"arrive", {"arrival time"}},
        {"time", {"travel time", "time"}},
        {"id", {"train number"}},
        {"class", {"seat class"}},
        {"score", {"rating", "score"}},
        {"star", {"star rating"}},
        {"station", {"nearest station"}},
        {"facility", {"facilities"}},
    };
    p.domains = {
        {"attraction", {"attraction", "place to visit"}}, {"hospital", {"hospital"}}, {"hotel", {"hotel", "place to stay"}},
        {"restaurant", {"restaurant", "place to eat"}},     {"train", {"train"}},       {"taxi", {"taxi"}},
    };
    return p;
  }();
  return pack;
}

std::string_view to_string(ActKind k) {
  switch (k) {
    case ActKind::greet: return "greet";
    case ActKind::inform: return "inform";
    case ActKind::request: return "request";
    case ActKind::book: return "book";
    case ActKind::edit: return "edit";
    case ActKind::cancel: return "cancel";
    case ActKind::rebook: return "rebook";
    case ActKind::bye: return "bye";
  }
  return "greet";
}

void to_json(Json& j, const SimulatorConfig& v) {
  j = Json{{"max_turns", v.max_turns},
           {"greet_probability", v.greet_probability},
           {"pair_chunk_probability", v.pair_chunk_probability},
           {"two_requests_probability", v.two_requests_probability},
           {"merge_request_book_probability", v.merge_request_book_probability},
           {"merge_domain_switch_probability", v.merge_domain_switch_probability},
           {"ask_next_probability", v.ask_next_probability},
           {"more_probability", v.more_probability},
           {"rebook_probability", v.rebook_probability},
           {"say_name_probability", v.say_name_probability},
           {"pack", v.pack}};
}

void from_json(const Json& j, SimulatorConfig& v) {
  SimulatorConfig d;
  v.max_turns = j.value("max_turns", d.max_turns);
  v.greet_probability = j.value("greet_probability", d.greet_probability);
  v.pair_chunk_probability = j.value("pair_chunk_probability", d.pair_chunk_probability);
  v.two_requests_probability = j.value("two_requests_probability", d.two_requests_probability);
  v.merge_request_book_probability = j.value("merge_request_book_probability", d.merge_request_book_probability);
  v.merge_domain_switch_probability = j.value("merge_domain_switch_probability", d.merge_domain_switch_probability);
  v.ask_next_probability = j.value("ask_next_probability", d.ask_next_probability);
  v.more_probability = j.value("more_probability", d.more_probability);
  v.rebook_probability = j.value("rebook_probability", d.rebook_probability);
  v.say_name_probability = j.value("say_name_probability", d.say_name_probability);
  v.pack = j.contains("pack") ? j.at("pack").get<UtterancePack>() : d.pack;
  if (v.max_turns == 0) throw Error(Error::Kind::config, "max_turns must be positive");
}

// ---- ledger ----------------------------------------------------------------

UserLedger::UserLedger(const UserGoal& goal)
    : constraints(goal.constraints),
      expressed(goal.constraints.size(), false),
      checked(goal.constraints.size(), false),
      requests(goal.requests),
      filled(goal.requests.size()) {}

bool UserLedger::completed() const {
  return std::all_of(checked.begin(), checked.end(), [](bool b) { return b; }) &&
         std::all_of(filled.begin(), filled.end(), [](const std::string& s) { return !s.empty(); });
}

void UserLedger::express(const Constraint& c) {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i] == c) expressed[i] = true;
  }
}

void UserLedger::observe(const Turn& turn, const Database& db) {
  auto check = [&](const DomainName& d, const auto& lookup) {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      if (c.domain != d || !expressed[i]) continue;
      const std::string* v = lookup(c.attribute);
      if (v && match_key(*v) == match_key(c.value)) checked[i] = true;
    }
  };
  for (std::size_t i = 0; i < turn.api_results.size() && i < turn.api_calls.size(); ++i) {
    const auto* spec = db.api(turn.api_calls[i].api);
    if (!spec) continue;
    const auto& r = turn.api_results[i];
    if (r.operation == Operation::find) {
      for (const auto& rv : turn.response_values) {
        if (rv.domain != spec->domain || rv.attribute != "name") continue;
        for (const auto& e : db.entities_of(spec->domain)) {
          const auto* n = e.get("name");
          if (n && *n == rv.value) check(spec->domain, [&](const Attribute& a) { return e.get(a); });
        }
      }
    } else if (r.operation != Operation::remove) {
      check(spec->domain, [&](const Attribute& a) -> const std::string* {
        auto it = r.values.find(a);
        return it == r.values.end() ? nullptr : &it->second;
      });
    }
  }
  for (const auto& rv : turn.response_values) {
    if (turn.agent_response.find(rv.value) == std::string::npos) continue;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (requests[i].domain == rv.domain && requests[i].attribute == rv.attribute) filled[i] = rv.value;
    }
  }
}

// ---- user ------------------------------------------------------------------

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t p = 0;
  while ((p = s.find(from, p)) != std::string::npos) {
    s.replace(p, from.size(), to);
    p += to.size();
  }
  return s;
}

bool in(const std::vector<Attribute>& v, const Attribute& a) { return std::find(v.begin(), v.end(), a) != v.end(); }

// Whether some value's tokens occur inside another value's tokens.
bool values_collide(const std::vector<std::string>& values) {
  std::vector<std::string> keys;
  for (const auto& v : values) {
    std::string k = " ";
    for (const auto& t : text::tokenize(v)) k += t.text + " ";
    keys.push_back(k);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 0; j < keys.size(); ++j) {
      if (i != j && keys[i].find(keys[j]) != std::string::npos) return true;
    }
  }
  return false;
}

// "a" before a vowel becomes "an".
std::string fix_articles(std::string s) {
  auto vowel = [](char c) { return std::string_view("aeiouAEIOU").find(c) != std::string_view::npos; };
  for (std::size_t p = 0; p + 2 < s.size(); ++p) {
    bool start = p == 0 || s[p - 1] == ' ';
    if (start && (s[p] == 'a' || s[p] == 'A') && s[p + 1] == ' ' && vowel(s[p + 2])) s.insert(p + 1, "n");
  }
  return s;
}

std::vector<std::string> turn_values(const std::vector<UserAct>& acts) {
  std::vector<std::string> out;
  for (const auto& a : acts) {
    for (const auto& c : a.constraints) out.push_back(c.value);
  }
  return out;
}

}  // namespace

UserSimulator::UserSimulator(const UserGoal& goal, const Database& db, const SimulatorConfig& config,
                             std::uint64_t seed)
    : db_(db), config_(config), rng_(seed), ledger_(goal) {
  std::vector<std::vector<std::vector<UserAct>>> per_domain;
  for (const auto& d : goal.domains) {
    auto caps = capabilities(db, d);
    const auto* schema = db.domain(d);
    std::vector<Constraint> search, booking, edits;
    for (const auto& c : goal.constraints) {
      if (c.domain != d) continue;
      if (in(caps.booking, c.attribute)) {
        booking.push_back(c);
      } else if (!schema->entity_less && in(caps.searchable, c.attribute)) {
        search.push_back(c);
      } else {
        edits.push_back(c);
      }
    }
    std::vector<Attribute> requests;
    for (const auto& r : goal.requests) {
      if (r.domain == d && !in(caps.booking_outputs, r.attribute)) requests.push_back(r.attribute);
    }
    const bool books = !booking.empty();

    std::vector<std::vector<UserAct>> turns;
    if (d == "train" && search.size() == 4) {
      turns.push_back({{ActKind::inform, d, {search[0], search[1]}, {}}});
      turns.push_back({{ActKind::inform, d, {search[2], search[3]}, {}}});
    } else {
      for (std::size_t i = 0; i < search.size();) {
        std::size_t n = i + 1 < search.size() && rng_.chance(config.pair_chunk_probability) ? 2 : 1;
        if (n == 2 && values_collide({search[i].value, search[i + 1].value})) n = 1;
        std::vector<Constraint> chunk(search.begin() + static_cast<std::ptrdiff_t>(i),
                                      search.begin() + static_cast<std::ptrdiff_t>(i + n));
        rng_.shuffle(chunk);
        turns.push_back({{ActKind::inform, d, chunk, {}}});
        i += n;
      }
    }
    for (std::size_t i = 0; i < requests.size();) {
      std::size_t n = i + 1 < requests.size() && rng_.chance(config.two_requests_probability) ? 2 : 1;
      turns.push_back({{ActKind::request, d, {}, {requests.begin() + static_cast<std::ptrdiff_t>(i),
                                                  requests.begin() + static_cast<std::ptrdiff_t>(i + n)}}});
      i += n;
    }
    if (books) {
      UserAct book{ActKind::book, d, booking, {}};
      bool merged = false;
      if (!requests.empty() && rng_.chance(config.merge_request_book_probability)) {
        auto& last = turns.back();
        auto values = turn_values(last);
        for (const auto& c : booking) values.push_back(c.value);
        if (!values_collide(values)) {
          last.push_back(book);
          merged = true;
        }
      }
      if (!merged) turns.push_back({book});
      if (booking.size() && rng_.chance(config.rebook_probability)) {
        turns.push_back({{ActKind::cancel, d, {}, {}}});
        turns.push_back({{ActKind::rebook, d, booking, {}}});
      }
      for (const auto& c : edits) turns.push_back({{ActKind::edit, d, {c}, {}}});
    }
    per_domain.push_back(std::move(turns));
  }

  if (rng_.chance(config.greet_probability)) agenda_.push_back({{ActKind::greet, {}, {}, {}}});
  for (auto& turns : per_domain) {
    if (turns.empty()) continue;
    std::size_t start = 0;
    if (!agenda_.empty() && agenda_.back().front().kind != ActKind::greet &&
        rng_.chance(config.merge_domain_switch_probability)) {
      auto values = turn_values(agenda_.back());
      auto more = turn_values(turns.front());
      values.insert(values.end(), more.begin(), more.end());
      if (!values_collide(values)) {
        agenda_.back().insert(agenda_.back().end(), turns.front().begin(), turns.front().end());
        start = 1;
      }
    }
    for (std::size_t i = start; i < turns.size(); ++i) agenda_.push_back(std::move(turns[i]));
  }
  agenda_.push_back({{ActKind::bye, {}, {}, {}}});
}

const std::vector<UserAct>* UserSimulator::peek() const { return next_ < agenda_.size() ? &agenda_[next_] : nullptr; }

std::string UserSimulator::pick(const std::string& act) {
  auto it = config_.pack.acts.find(act);
  if (it == config_.pack.acts.end() || it->second.empty()) {
    throw Error(Error::Kind::config, "utterance pack has no '" + act + "' templates");
  }
  return rng_.pick(it->second);
}

std::string UserSimulator::word(const Attribute& a) {
  auto it = config_.pack.words.find(a);
  return it == config_.pack.words.end() || it->second.empty() ? a : rng_.pick(it->second);
}

std::string UserSimulator::phrase(const Constraint& c) {
  auto it = config_.pack.phrases.find(c.attribute);
  std::string p = it == config_.pack.phrases.end() || it->second.empty() ? "with " + c.attribute + " {v}"
                                                                          : rng_.pick(it->second);
  return replace_all(p, "{v}", c.value);
}

std::string UserSimulator::realize(const std::vector<UserAct>& acts) {
  std::string out;
  std::set<DomainName> informed;
  for (std::size_t i = 0; i < ledger_.constraints.size(); ++i) {
    if (ledger_.expressed[i]) informed.insert(ledger_.constraints[i].domain);
  }
  for (const auto& act : acts) {
    std::string s;
    std::string c;
    for (std::size_t i = 0; i < act.constraints.size(); ++i) {
      if (i) c += " and ";
      c += phrase(act.constraints[i]);
    }
    auto dom = [&] {
      auto it = config_.pack.domains.find(act.domain);
      return it == config_.pack.domains.end() || it->second.empty() ? act.domain : rng_.pick(it->second);
    };
    const auto name = entity_.count(act.domain) ? entity_[act.domain] : std::string();
    const bool named = !name.empty() && rng_.chance(config_.say_name_probability);
    switch (act.kind) {
      case ActKind::greet: s = pick("greet"); break;
      case ActKind::bye: s = pick("bye"); break;
      case ActKind::inform:
        s = informed.count(act.domain) ? pick("inform_more") : replace_all(pick("inform"), "{dom}", dom());
        s = replace_all(s, "{c}", c);
        informed.insert(act.domain);
        break;
      case ActKind::request:
        if (act.requests.size() >= 2) {
          s = pick(named ? "request2_named" : "request2");
          s = replace_all(s, "{m1}", word(act.requests[0]));
          s = replace_all(s, "{m2}", word(act.requests[1]));
        } else {
          s = replace_all(pick(named ? "request_named" : "request"), "{m}", word(act.requests.front()));
        }
        s = replace_all(s, "{name}", name);
        break;
      case ActKind::book:
        if (db_.domain(act.domain)->entity_less) {
          s = replace_all(pick("book_taxi"), "{c}", c);
        } else {
          s = replace_all(replace_all(pick(named ? "book_named" : "book"), "{c}", c), "{name}", name);
        }
        break;
      case ActKind::rebook: s = replace_all(pick("rebook"), "{c}", c); break;
      case ActKind::edit:
        s = replace_all(pick("edit"), "{m}", word(act.constraints.front().attribute));
        s = replace_all(replace_all(s, "{v}", act.constraints.front().value), "{dom}", dom());
        break;
      case ActKind::cancel:
        s = replace_all(replace_all(pick("cancel"), "{dom}", dom()), "{ref}", reference_[act.domain]);
        break;
    }
    for (const auto& k : act.constraints) ledger_.express(k);
    if (!out.empty()) out += ' ';
    out += s;
  }
  return fix_articles(out);
}

std::vector<std::vector<UserAct>> UserSimulator::repair() {
  std::vector<std::vector<UserAct>> out;
  std::map<DomainName, std::vector<Constraint>> search, booking;
  for (std::size_t i = 0; i < ledger_.constraints.size(); ++i) {
    if (ledger_.checked[i]) continue;
    const auto& c = ledger_.constraints[i];
    auto caps = capabilities(db_, c.domain);
    if (in(caps.booking, c.attribute)) {
      booking[c.domain].push_back(c);
    } else if (in(caps.searchable, c.attribute) && !db_.domain(c.domain)->entity_less) {
      search[c.domain].push_back(c);
    } else {
      out.push_back({{ActKind::edit, c.domain, {c}, {}}});
    }
  }
  for (auto& [d, cs] : search) {
    for (const auto& c : cs) out.insert(out.begin(), {{ActKind::inform, d, {c}, {}}});
  }
  for (auto& [d, cs] : booking) out.push_back({{ActKind::book, d, cs, {}}});
  for (std::size_t i = 0; i < ledger_.requests.size(); ++i) {
    const auto& r = ledger_.requests[i];
    if (!ledger_.filled[i].empty() || in(capabilities(db_, r.domain).booking_outputs, r.attribute)) continue;
    out.push_back({{ActKind::request, r.domain, {}, {r.attribute}}});
  }
  return out;
}

std::optional<UserTurn> UserSimulator::step(const Turn* last) {
  if (last) {
    ledger_.observe(*last, db_);
    for (const auto& v : last->response_values) {
      if (v.attribute == "name") entity_[v.domain] = v.value;
      if (v.attribute == "reference num.") reference_[v.domain] = v.value;
    }
  }
  if (next_ >= agenda_.size()) return std::nullopt;
  if (agenda_[next_].front().kind == ActKind::bye && !ledger_.completed()) {
    auto fix = repair();
    agenda_.insert(agenda_.begin() + static_cast<std::ptrdiff_t>(next_), fix.begin(), fix.end());
  }
  UserTurn t;
  t.acts = agenda_[next_++];
  t.text = realize(t.acts);
  return t;
}

// ---- agent -----------------------------------------------------------------

std::optional<Span> oracle_span(const std::vector<Utterance>& history, std::string_view value) {
  if (value.empty()) return std::nullopt;
  auto word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80; };
  for (std::size_t u = history.size(); u-- > 0;) {
    const auto s = history[u].text;
    for (std::size_t p = s.rfind(value); p != std::string_view::npos; p = p ? s.rfind(value, p - 1) : std::string_view::npos) {
      const auto e = p + value.size();
      bool left = p == 0 || !word(static_cast<unsigned char>(s[p - 1])) || !word(static_cast<unsigned char>(s[p]));
      bool right = e == s.size() || !word(static_cast<unsigned char>(s[e])) || !word(static_cast<unsigned char>(s[e - 1]));
      if (left && right) return Span{history[u].turn, history[u].speaker, p, e};
      if (p == 0) break;
    }
  }
  return std::nullopt;
}

AgentSimulator::AgentSimulator(const Database& db, const Manual& manual, const SimulatorConfig& config,
                               std::uint64_t seed, AgentMode mode, Predictors predictors)
    : db_(db), manual_(manual), config_(config), rng_(seed), mode_(mode), predictors_(predictors) {
  state_.seed = Rng::derive(seed, "references");
  if (mode == AgentMode::model && (!predictors.matcher || !predictors.tagger)) {
    throw Error(Error::Kind::argument, "model mode needs a matcher and a tagger");
  }
}

const Instruction& AgentSimulator::instruction(const std::string& family) const {
  const auto* ins = manual_.find(manual_.id + "/" + family);
  if (!ins) throw Error(Error::Kind::not_found, "manual " + manual_.id + " has no family '" + family + "'");
  return *ins;
}

void AgentSimulator::call(Dialogue& dialogue, const Instruction& ins,
                          const std::vector<std::pair<Attribute, std::string>>& args) {
  auto& turn = dialogue.turns.back();
  const auto hist = history(dialogue, turn.index);
  const auto* spec = db_.api(ins.api->api);
  ApiCall c;
  c.api = ins.api->api;
  c.instruction = ins.id;
  for (const auto& [a, v] : args) {
    auto span = oracle_span(hist, v);
    if (!span) throw Error(Error::Kind::generation, ins.id + ": value '" + v + "' was never uttered");
    c.args.push_back({a, v, span});
    turn.argument_annotations.push_back({ins.id, spec->input_index(a), *span});
  }
  auto result = execute(c, db_, state_);
  turn.api_calls.push_back(c);
  turn.api_results.push_back(result);
  log_.push_back({turn.index, c, result});
}

void AgentSimulator::respond(Dialogue& dialogue, const std::vector<const Instruction*>& selected) {
  auto& turn = dialogue.turns.back();
  for (const auto* ins : selected) turn.selected_instructions.push_back(ins->id);
  auto r = realize(selected, turn.api_calls, turn.api_results, state_.carryover,
                   Rng::derive(state_.seed, "turn/" + std::to_string(turn.index)));
  turn.agent_response = r.text;
  turn.response_values = r.values;
  for (const auto& v : r.values) {
    if (v.attribute == "name") entity_[v.domain] = v.value;
    if (v.attribute == "reference num.") reference_[v.domain] = v.value;
  }
}

void AgentSimulator::step(Dialogue& dialogue, const std::vector<UserAct>& acts, const std::vector<UserAct>* upcoming) {
  if (dialogue.turns.empty()) throw Error(Error::Kind::sequencing, "agent step without a user utterance");
  if (mode_ == AgentMode::oracle) {
    oracle(dialogue, acts, upcoming);
  } else {
    model(dialogue);
  }
  auto& turn = dialogue.turns.back();
  turn.needs_review = turn.selected_instructions.empty();
  if (turn.agent_response.empty()) {
    bool bye = std::any_of(acts.begin(), acts.end(), [](const UserAct& a) { return a.kind == ActKind::bye; });
    bool greet = std::any_of(acts.begin(), acts.end(), [](const UserAct& a) { return a.kind == ActKind::greet; });
    const char* key = bye ? "agent_bye" : greet ? "agent_greet" : "agent_fallback";
    const auto& list = config_.pack.acts.at(key);
    turn.agent_response = rng_.pick(list);
  }
}

void AgentSimulator::oracle(Dialogue& dialogue, const std::vector<UserAct>& acts, const std::vector<UserAct>* upcoming) {
  std::vector<const Instruction*> selected;
  auto add = [&](const Instruction& ins) {
    if (std::find(selected.begin(), selected.end(), &ins) == selected.end()) selected.push_back(&ins);
  };
  auto key_args = [&](const ApiSpec& spec, const DomainName& d, const std::vector<Constraint>& cs) {
    std::vector<std::pair<Attribute, std::string>> args;
    for (const auto& in : spec.inputs) {
      if (in.attribute == "name" || in.attribute == "id") {
        args.emplace_back(in.attribute, entity_[d]);
      } else if (in.attribute == "reference num.") {
        args.emplace_back(in.attribute, reference_[d]);
      } else {
        for (const auto& c : cs) {
          if (c.attribute == in.attribute) args.emplace_back(in.attribute, c.value);
        }
      }
    }
    return args;
  };
  std::set<DomainName> domains;
  for (const auto& act : acts) {
    const auto& d = act.domain;
    if (!d.empty()) domains.insert(d);
    switch (act.kind) {
      case ActKind::greet:
      case ActKind::bye: break;
      case ActKind::inform: {
        auto caps = capabilities(db_, d);
        std::vector<Attribute> attrs;
        for (const auto& a : caps.searchable) {
          for (const auto& c : act.constraints) {
            if (c.attribute == a) attrs.push_back(a);
          }
        }
        if (!style_.count(d)) style_[d] = 1 + static_cast<int>(rng_.below(2));
        const auto& ins = instruction(family_name({d, "search", attrs, style_[d]}));
        add(ins);
        call(dialogue, ins, key_args(*db_.api(ins.api->api), d, act.constraints));
        break;
      }
      case ActKind::request:
        for (const auto& r : act.requests) {
          const auto& ins = instruction(family_name({d, "info", {r}, 0}));
          add(ins);
          call(dialogue, ins, key_args(*db_.api(ins.api->api), d, {}));
        }
        break;
      case ActKind::book:
      case ActKind::rebook: {
        const auto& ins = instruction(family_name({d, "book", {}, 0}));
        add(ins);
        call(dialogue, ins, key_args(*db_.api(ins.api->api), d, act.constraints));
        break;
      }
      case ActKind::edit: {
        const auto& ins = instruction(family_name({d, "update", {act.constraints.front().attribute}, 0}));
        add(ins);
        call(dialogue, ins, key_args(*db_.api(ins.api->api), d, act.constraints));
        break;
      }
      case ActKind::cancel: {
        const auto& ins = instruction(family_name({d, "cancel", {}, 0}));
        add(ins);
        call(dialogue, ins, key_args(*db_.api(ins.api->api), d, {}));
        break;
      }
    }
  }
  if (!acts.empty() && upcoming) {
    const auto& last = acts.back();
    bool continues = false;
    for (const auto& u : *upcoming) continues = continues || domains.count(u.domain);
    const auto& next = upcoming->front();
    if (last.kind == ActKind::inform && next.kind == ActKind::inform && next.domain == last.domain &&
        rng_.chance(config_.ask_next_probability)) {
      add(instruction(family_name({last.domain, "ask", {next.constraints.front().attribute}, 0})));
    } else if (!continues && !last.domain.empty() && last.kind != ActKind::inform &&
               rng_.chance(config_.more_probability)) {
      add(instruction(family_name({last.domain, "more", {}, 0})));
    }
  }
  respond(dialogue, selected);
}

void AgentSimulator::model(Dialogue& dialogue) {
  auto& turn = dialogue.turns.back();
  auto decisions = match(dialogue, turn.index, manual_, *predictors_.matcher, predictors_.threshold);
  std::stable_sort(decisions.begin(), decisions.end(),
                   [](const MatchDecision& a, const MatchDecision& b) { return a.score > b.score; });
  std::vector<const Instruction*> selected;
  for (const auto& d : decisions) {
    if (d.selected && selected.size() < kMaxSelectedInstructions) selected.push_back(manual_.find(d.instruction));
  }
  std::vector<const Instruction*> kept;
  for (const auto* ins : selected) {
    if (ins->api) {
      auto seq = predictors_.tagger->tag(dialogue, turn.index, *ins);
      const auto* spec = db_.api(ins->api->api);
      ApiCall c;
      c.api = spec->name;
      c.instruction = ins->id;
      for (const auto& s : decode(seq)) {
        if (s.index < 1 || s.index > static_cast<int>(spec->inputs.size())) continue;
        auto text = span_text(dialogue, s.span);
        if (!text) continue;
        c.args.push_back({spec->inputs[static_cast<std::size_t>(s.index - 1)].attribute, std::string(*text), s.span});
        turn.argument_annotations.push_back({ins->id, s.index, s.span});
      }
      try {
        auto r = execute(c, db_, state_);
        turn.api_calls.push_back(c);
        turn.api_results.push_back(r);
        log_.push_back({turn.index, c, r});
      } catch (const Error&) {
        continue;
      }
    }
    try {
      realize({ins}, turn.api_calls, turn.api_results, state_.carryover, 0);
      kept.push_back(ins);
    } catch (const Error&) {
    }
  }
  respond(dialogue, kept);
}

// ---- self-play and corpora -------------------------------------------------

SelfPlayResult self_play(const UserGoal& goal, const Manual& manual, const Database& db, std::uint64_t seed,
                         const SimulatorConfig& config, AgentMode mode, Predictors predictors) {
  SelfPlayResult out;
  out.dialogue.id = "d-" + goal.id;
  out.dialogue.goal = goal;
  out.dialogue.manual_id = manual.id;
  UserSimulator user(goal, db, config, Rng::derive(seed, "user"));
  AgentSimulator agent(db, manual, config, Rng::derive(seed, "agent"), mode, predictors);
  bool capped = false;
  while (true) {
    const Turn* last = out.dialogue.turns.empty() ? nullptr : &out.dialogue.turns.back();
    auto ut = user.step(last);
    if (!ut) break;
    if (out.dialogue.turns.size() >= config.max_turns) {
      capped = true;
      break;
    }
    Turn t;
    t.index = static_cast<int>(out.dialogue.turns.size());
    t.user_utterance = ut->text;
    out.dialogue.turns.push_back(std::move(t));
    agent.step(out.dialogue, ut->acts, user.peek());
  }
  out.completed = !capped && user.completed();
  out.dialogue.completed = out.completed;
  out.log = agent.log();
  return out;
}

void to_json(Json& j, const CorpusConfig& v) {
  j = Json{{"seed", v.seed},   {"train", v.train}, {"dev", v.dev}, {"test", v.test}, {"train_manuals", v.train_manuals},
           {"test_manuals", v.test_manuals}, {"goals", v.goals}, {"simulator", v.simulator}};
}

void from_json(const Json& j, CorpusConfig& v) {
  CorpusConfig d;
  v.seed = j.value("seed", d.seed);
  v.train = j.value("train", d.train);
  v.dev = j.value("dev", d.dev);
  v.test = j.value("test", d.test);
  v.train_manuals = j.value("train_manuals", d.train_manuals);
  v.test_manuals = j.value("test_manuals", d.test_manuals);
  v.goals = j.contains("goals") ? j.at("goals").get<GoalConfig>() : d.goals;
  v.simulator = j.contains("simulator") ? j.at("simulator").get<SimulatorConfig>() : d.simulator;
}

Corpus generate_corpus(const Database& db, const std::vector<Manual>& manuals, const CorpusConfig& config) {
  std::set<std::size_t> train_set(config.train_manuals.begin(), config.train_manuals.end());
  for (auto m : config.train_manuals) {
    if (m >= manuals.size()) throw Error(Error::Kind::config, "train manual position out of range");
  }
  for (auto m : config.test_manuals) {
    if (m >= manuals.size()) throw Error(Error::Kind::config, "test manual position out of range");
    if (train_set.count(m)) throw Error(Error::Kind::config, "manual " + manuals[m].id + " is in both partitions");
  }
  if ((config.train + config.dev) > 0 && config.train_manuals.empty()) {
    throw Error(Error::Kind::config, "no training manuals");
  }
  if (config.test > 0 && config.test_manuals.empty()) throw Error(Error::Kind::config, "no test manuals");

  const std::size_t total = config.train + config.dev + config.test;
  const std::size_t spare = total / 10 + 10;
  auto goals = sample_goals(db, Rng::derive(config.seed, "goals"), total + spare, config.goals);

  Corpus corpus;
  std::size_t g = 0;
  auto produce = [&](std::size_t count, const std::vector<std::size_t>& pool, std::vector<Dialogue>& into) {
    for (std::size_t i = 0; i < count;) {
      if (g >= goals.size()) throw Error(Error::Kind::generation, "ran out of distinct goals");
      const auto& goal = goals[g++];
      const auto& manual = manuals[pool[i % pool.size()]];
      auto r = self_play(goal, manual, db, Rng::derive(config.seed, "dialogue/" + goal.id), config.simulator);
      if (!r.completed) {
        ++corpus.failed;
        continue;
      }
      auto problems = validate(r.dialogue, db, &manual);
      if (!problems.empty()) throw Error(Error::Kind::generation, r.dialogue.id + ": " + describe(problems));
      into.push_back(std::move(r.dialogue));
      ++i;
    }
  };
  produce(config.train, config.train_manuals, corpus.train);
  produce(config.dev, config.train_manuals, corpus.dev);
  produce(config.test, config.test_manuals, corpus.test);

  std::size_t n = 0;
  auto rename = [&](std::vector<Dialogue>& list) {
    for (auto& d : list) {
      std::string s = std::to_string(n++);
      d.id = "d" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
    }
  };
  rename(corpus.train);
  rename(corpus.dev);
  rename(corpus.test);

  auto ids = [](const std::vector<Dialogue>& list) {
    std::vector<std::string> out;
    for (const auto& d : list) out.push_back(d.id);
    return out;
  };
  auto manual_ids = [&](const std::vector<std::size_t>& pos) {
    std::vector<std::string> out;
    for (auto p : pos) out.push_back(manuals[p].id);
    return out;
  };
  corpus.manifest = Json{{"seed", config.seed},
                         {"config", config},
                         {"database_hash", hex_digest(Json(db).dump())},
                         {"train_manuals", manual_ids(config.train_manuals)},
                         {"test_manuals", manual_ids(config.test_manuals)},
                         {"splits", {{"train", ids(corpus.train)}, {"dev", ids(corpus.dev)}, {"test", ids(corpus.test)}}},
                         {"failed", corpus.failed}};
  return corpus;
}

CorpusStats corpus_stats(const std::vector<Dialogue>& dialogues) {
  CorpusStats s;
  std::size_t instructions = 0, args = 0, empty = 0;
  for (const auto& d : dialogues) {
    ++s.dialogues;
    for (const auto& t : d.turns) {
      ++s.turns;
      instructions += t.selected_instructions.size();
      args += t.argument_annotations.size();
      empty += t.selected_instructions.empty();
    }
  }
  if (s.dialogues) s.turns_per_dialogue = static_cast<double>(s.turns) / static_cast<double>(s.dialogues);
  if (s.turns) {
    auto n = static_cast<double>(s.turns);
    s.instructions_per_turn = static_cast<double>(instructions) / n;
    s.args_per_turn = static_cast<double>(args) / n;
    s.no_instruction_share = static_cast<double>(empty) / n;
  }
  return s;
}

void to_json(Json& j, const CorpusStats& v) {
  j = Json{{"dialogues", v.dialogues},
           {"turns", v.turns},
           {"turns_per_dialogue", v.turns_per_dialogue},
           {"instructions_per_turn", v.instructions_per_turn},
           {"args_per_turn", v.args_per_turn},
           {"no_instruction_share", v.no_instruction_share}};
}

void save_corpus_dir(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  save_corpus(dir + "/train.jsonl", corpus.train);
  save_corpus(dir + "/dev.jsonl", corpus.dev);
  save_corpus(dir + "/test.jsonl", corpus.test);
  write_file(dir + "/manifest.json", make_document("corpus_manifest", corpus.manifest).dump(1) + "\n");
}

Corpus load_corpus_dir(const std::string& dir) {
  Corpus c;
  c.train = load_corpus(dir + "/train.jsonl");
  c.dev = load_corpus(dir + "/dev.jsonl");
  c.test = load_corpus(dir + "/test.jsonl");
  c.manifest = open_document(parse_json(read_file(dir + "/manifest.json")), "corpus_manifest");
  c.failed = c.manifest.value("failed", std::size_t{0});
  return c;
}

}  // namespace magdial
