#include "magdial/service.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <tuple>

#include "httplib.h"
#include "magdial/error.hpp"
#include "magdial/text.hpp"
#include "magdial/validate.hpp"

namespace magdial {

namespace {

Error forbidden(const std::string& what) { return Error(Error::Kind::forbidden, what); }
Error sequencing(const std::string& what) { return Error(Error::Kind::sequencing, what); }

Json reply(Json body) {
  body["version"] = kServiceVersion;
  return body;
}

void check_version(const Json& request) {
  if (!request.is_object()) throw Error(Error::Kind::schema, "request body must be an object");
  if (request.contains("version") && request["version"] != kServiceVersion) {
    throw Error(Error::Kind::schema, "unsupported payload version " + request["version"].dump());
  }
}

template <class T>
T field(const Json& request, const char* key) {
  if (!request.contains(key)) throw Error(Error::Kind::missing_argument, std::string("missing field '") + key + "'");
  try {
    return request.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(Error::Kind::schema, std::string("field '") + key + "' has the wrong type");
  }
}

Turn& current_turn(SessionState& s) {
  if (s.dialogue.turns.empty()) throw sequencing("no open turn");
  return s.dialogue.turns.back();
}

// Values of the turn's API results that the agent's text states, in text
// order with the surface form used. A span claimed by several attributes is
// kept once, preferring the entity name.
std::vector<ResponseValue> stated_values(const Turn& turn, const Database& db) {
  struct Hit {
    std::size_t begin, end;
    int rank;
    ResponseValue value;
  };
  std::vector<Hit> hits;
  std::vector<Utterance> text{{turn.index, Speaker::agent, turn.agent_response}};
  auto consider = [&](const DomainName& domain, const Attribute& attribute, const std::string& value) {
    if (value.empty()) return;
    auto m = best_match(text, value, 1.0);
    if (!m) return;
    auto surface = turn.agent_response.substr(m->span.begin, m->span.end - m->span.begin);
    hits.push_back({m->span.begin, m->span.end, attribute == "name" ? 0 : 1, {domain, attribute, surface}});
  };
  for (std::size_t i = 0; i < turn.api_calls.size() && i < turn.api_results.size(); ++i) {
    const auto* spec = db.api(turn.api_calls[i].api);
    if (!spec) continue;
    const auto& r = turn.api_results[i];
    if (r.operation == Operation::find && r.count > 0) consider(spec->domain, "choice", std::to_string(r.count));
    for (const auto& e : r.entities) {
      for (const auto& [a, v] : e.attributes) consider(spec->domain, a, v);
    }
    if (!r.reference.empty()) consider(spec->domain, "reference num.", r.reference);
    for (const auto& [a, v] : r.values) consider(spec->domain, a, v);
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::tie(a.begin, a.end, a.rank) < std::tie(b.begin, b.end, b.rank);
  });
  std::vector<ResponseValue> out;
  std::set<std::pair<std::size_t, std::size_t>> spans;
  for (auto& h : hits) {
    if (spans.insert({h.begin, h.end}).second) out.push_back(std::move(h.value));
  }
  return out;
}

Json checklist_json(const SessionState& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.checklist.check.size(); ++i) {
    const auto& c = s.checklist.check[i];
    rows.push_back({{"index", i}, {"kind", "check"}, {"domain", c.domain}, {"attribute", c.attribute},
                    {"value", c.value}, {"done", bool(s.checked[i])}});
  }
  for (std::size_t i = 0; i < s.checklist.fill.size(); ++i) {
    const auto& r = s.checklist.fill[i];
    rows.push_back({{"index", i}, {"kind", "fill"}, {"domain", r.domain}, {"attribute", r.attribute},
                    {"value", s.filled[i]}, {"done", !s.filled[i].empty()}});
  }
  return rows;
}

Json missing_items(const SessionState& s) {
  Json out = Json::array();
  for (std::size_t i = 0; i < s.checklist.check.size(); ++i) {
    if (!s.checked[i]) out.push_back("check " + s.checklist.check[i].domain + "." + s.checklist.check[i].attribute);
  }
  for (std::size_t i = 0; i < s.checklist.fill.size(); ++i) {
    if (s.filled[i].empty()) out.push_back("fill " + s.checklist.fill[i].domain + "." + s.checklist.fill[i].attribute);
  }
  return out;
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::user ? "user" : "agent"; }

Service::Service(const Database& db, const std::vector<Manual>& manuals, std::vector<UserGoal> goals,
                 ServiceOptions options)
    : db_(db), options_(options) {
  for (const auto& m : manuals) manuals_[m.id] = &m;
  for (auto& g : goals) {
    auto id = g.id;
    goals_[id] = std::move(g);
  }
  token_seed_ = options_.token_seed ? *options_.token_seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
}

std::string Service::token(const std::string& session, Role role) const {
  return hex_digest(std::to_string(token_seed_) + "/" + session + "/" + std::string(to_string(role))) +
         hex_digest(std::string(to_string(role)) + "/" + session + "/" + std::to_string(~token_seed_));
}

Service::Session& Service::session(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Error::Kind::not_found, "unknown session '" + id + "'");
  return *it->second;
}

Role Service::authorize(const Session& s, const std::string& token) const {
  if (!token.empty() && token == s.user_token) return Role::user;
  if (!token.empty() && token == s.agent_token) return Role::agent;
  throw forbidden("invalid capability token");
}

void Service::require(const Session& s, const std::string& token, Role role) const {
  if (authorize(s, token) != role) throw forbidden("operation needs the " + std::string(to_string(role)) + " capability");
}

void Service::commit(Session& s, Json event) {
  event["seq"] = s.events.size();
  SessionState next = s.state;
  apply(next, event);
  s.state = std::move(next);
  s.events.push_back(std::move(event));
}

void Service::apply(SessionState& s, const Json& e) const {
  const auto type = e.at("type").get<std::string>();
  if (type == "created") {
    s = SessionState{};
    s.id = e.at("session").get<std::string>();
    s.goal_id = e.at("goal").get<std::string>();
    auto g = goals_.find(s.goal_id);
    if (g == goals_.end()) throw Error(Error::Kind::not_found, "unknown goal '" + s.goal_id + "'");
    auto m = manuals_.find(e.at("manual").get<std::string>());
    if (m == manuals_.end()) throw Error(Error::Kind::not_found, "unknown manual '" + e.at("manual").get<std::string>() + "'");
    s.manual = m->second;
    s.dialogue.id = e.at("dialogue_id").get<std::string>();
    s.dialogue.goal = g->second;
    s.dialogue.manual_id = s.manual->id;
    s.db_state.seed = e.at("seed").get<std::uint64_t>();
    s.checklist = render_goal(g->second).checklist;
    s.checked.assign(s.checklist.check.size(), false);
    s.filled.assign(s.checklist.fill.size(), "");
    return;
  }
  if (s.status == "completed") throw sequencing("session is finalized");
  if (type == "reopen") {
    if (s.status == "open") throw sequencing("session is already open");
    s.status = "open";
    return;
  }
  if (s.status != "open") throw sequencing("session is " + s.status + "; reopen it first");
  if (type == "message") {
    const auto role = e.at("role").get<std::string>();
    const auto text = e.at("text").get<std::string>();
    if (text.empty()) throw Error(Error::Kind::argument, "empty message");
    if (role == "user") {
      if (s.phase != Phase::awaiting_user) throw sequencing("waiting for the agent's message");
      Turn t;
      t.index = static_cast<int>(s.dialogue.turns.size());
      t.user_utterance = text;
      s.dialogue.turns.push_back(std::move(t));
      s.phase = Phase::awaiting_agent;
    } else {
      if (s.phase != Phase::awaiting_agent) throw sequencing("waiting for the user's message");
      auto& t = current_turn(s);
      t.agent_response = text;
      t.needs_review = t.selected_instructions.empty();
      t.response_values = stated_values(t, db_);
      s.phase = Phase::awaiting_user;
    }
  } else if (type == "select") {
    if (s.phase != Phase::awaiting_agent) throw sequencing("instructions are selected after the user's message");
    auto ids = e.at("ids").get<std::vector<std::string>>();
    if (ids.size() > kMaxSelectedInstructions) {
      throw Error(Error::Kind::validation, "at most " + std::to_string(kMaxSelectedInstructions) + " instructions per turn");
    }
    std::set<std::string> seen;
    for (const auto& id : ids) {
      if (!s.manual->find(id)) throw Error(Error::Kind::not_found, "instruction '" + id + "' not in manual " + s.manual->id);
      if (!seen.insert(id).second) throw Error(Error::Kind::validation, "instruction '" + id + "' selected twice");
    }
    current_turn(s).selected_instructions = std::move(ids);
  } else if (type == "api") {
    if (s.phase != Phase::awaiting_agent) throw sequencing("api calls are made after the user's message");
    ApiCall call;
    try {
      call = e.at("call").get<ApiCall>();
    } catch (const Json::exception& x) {
      throw Error(Error::Kind::schema, std::string("malformed call: ") + x.what());
    }
    if (auto v = validate(call, db_); !v.empty()) throw Error(Error::Kind::schema, describe(v));
    auto& t = current_turn(s);
    if (call.instruction) {
      if (!s.manual->find(*call.instruction)) {
        throw Error(Error::Kind::not_found, "instruction '" + *call.instruction + "' not in manual " + s.manual->id);
      }
      const auto& sel = t.selected_instructions;
      if (std::find(sel.begin(), sel.end(), *call.instruction) == sel.end()) {
        throw Error(Error::Kind::validation, "instruction '" + *call.instruction + "' is not selected");
      }
    }
    auto result = execute(call, db_, s.db_state);
    s.log.push_back({t.index, call, result});
    t.api_calls.push_back(std::move(call));
    t.api_results.push_back(std::move(result));
  } else if (type == "checklist") {
    for (const auto& i : e.value("check", Json::array())) {
      auto k = i.get<std::size_t>();
      if (k >= s.checked.size()) throw Error(Error::Kind::argument, "check index " + std::to_string(k) + " out of range");
      s.checked[k] = true;
    }
    for (const auto& i : e.value("uncheck", Json::array())) {
      auto k = i.get<std::size_t>();
      if (k >= s.checked.size()) throw Error(Error::Kind::argument, "check index " + std::to_string(k) + " out of range");
      s.checked[k] = false;
    }
    for (const auto& f : e.value("fill", Json::array())) {
      auto k = f.at("index").get<std::size_t>();
      if (k >= s.filled.size()) throw Error(Error::Kind::argument, "fill index " + std::to_string(k) + " out of range");
      s.filled[k] = f.at("value").get<std::string>();
    }
  } else if (type == "finalize") {
    if (s.phase != Phase::awaiting_user) throw sequencing("the last turn has no agent message");
    if (!missing_items(s).empty()) {
      s.status = "incomplete";
      return;
    }
    Dialogue d = s.dialogue;
    for (auto& t : d.turns) {
      t.argument_annotations.clear();
      for (auto& c : t.api_calls) {
        for (auto& a : c.args) a.span.reset();
      }
    }
    auto report = fuzzy_annotate(d, s.log, db_, options_.fuzzy_threshold);
    for (const auto& ta : report.annotations) {
      auto& t = d.turns.at(static_cast<std::size_t>(ta.turn));
      t.argument_annotations.push_back(ta.annotation);
      for (auto& c : t.api_calls) {
        if (c.instruction != ta.annotation.instruction) continue;
        const auto* spec = db_.api(c.api);
        for (auto& a : c.args) {
          if (spec && spec->input_index(a.attribute) == ta.annotation.index && !a.span) a.span = ta.annotation.span;
        }
      }
    }
    d.completed = true;
    if (auto v = validate(d, db_, s.manual); !v.empty()) {
      s.status = "failed";
      return;
    }
    s.status = "completed";
    s.exported = std::move(d);
  } else {
    throw Error(Error::Kind::schema, "unknown event type '" + type + "'");
  }
}

Json Service::create_session(const Json& request) {
  check_version(request);
  const auto goal = field<std::string>(request, "goal");
  const auto manual = field<std::string>(request, "manual");
  if (!goals_.count(goal)) throw Error(Error::Kind::not_found, "unknown goal '" + goal + "'");
  if (!manuals_.count(manual)) throw Error(Error::Kind::not_found, "unknown manual '" + manual + "'");
  auto s = std::make_unique<Session>();
  std::string id;
  {
    std::lock_guard lock(mutex_);
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%04zu", order_.size() + 1);
    id = buf;
    Json event{{"type", "created"},
               {"session", id},
               {"goal", goal},
               {"manual", manual},
               {"dialogue_id", request.contains("dialogue_id") ? field<std::string>(request, "dialogue_id") : "d-" + id},
               {"seed", request.contains("seed") ? field<std::uint64_t>(request, "seed") : fnv1a(id)}};
    s->user_token = token(id, Role::user);
    s->agent_token = token(id, Role::agent);
    commit(*s, std::move(event));
    sessions_[id] = std::move(s);
    order_.push_back(id);
  }
  auto rendered = render_goal(goals_.at(goal));
  return reply({{"session", id},
                {"user_token", token(id, Role::user)},
                {"agent_token", token(id, Role::agent)},
                {"goal", {{"description", rendered.description}, {"table", rendered.table}}},
                {"manual", manual}});
}

Json Service::view(const SessionState& s, Role role) const {
  Json turns = Json::array();
  for (const auto& t : s.dialogue.turns) {
    Json row{{"index", t.index}, {"user", t.user_utterance}, {"agent", t.agent_response}};
    if (role == Role::agent) {
      row["selected_instructions"] = t.selected_instructions;
      row["api_calls"] = t.api_calls;
      row["api_results"] = t.api_results;
      row["needs_review"] = t.needs_review;
    }
    turns.push_back(std::move(row));
  }
  Json out{{"session", s.id},
           {"role", to_string(role)},
           {"phase", s.phase == Phase::awaiting_user ? "awaiting_user" : "awaiting_agent"},
           {"status", s.status},
           {"turns", turns}};
  if (role == Role::user) {
    auto rendered = render_goal(s.dialogue.goal);
    out["goal"] = {{"description", rendered.description}, {"checklist", checklist_json(s)}};
  } else {
    out["manual"] = s.manual->id;
    out["bookings"] = Json::array();
    for (const auto& b : active_bookings(s.db_state)) {
      out["bookings"].push_back({{"reference", b.reference}, {"domain", b.domain}, {"attributes", b.attributes}});
    }
  }
  return reply(std::move(out));
}

Json Service::read_session(const std::string& id, const std::string& token) {
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  return view(s.state, authorize(s, token));
}

Json Service::post_message(const std::string& id, const std::string& token, Role role, const Json& request) {
  check_version(request);
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  require(s, token, role);
  commit(s, {{"type", "message"}, {"role", to_string(role)}, {"text", field<std::string>(request, "text")}});
  return view(s.state, role);
}

const SearchIndex& Service::index_for(const Manual& manual) {
  std::lock_guard lock(mutex_);
  auto& slot = indexes_[manual.id];
  if (!slot) slot = std::make_unique<SearchIndex>(manual);
  return *slot;
}

Json Service::search(const std::string& id, const std::string& token, const Json& request) {
  check_version(request);
  auto& s = session(id);
  const Manual* manual = nullptr;
  {
    std::lock_guard lock(s.mutex);
    require(s, token, Role::agent);
    manual = s.state.manual;
  }
  const auto query = field<std::string>(request, "query");
  const int k = request.contains("k") ? field<int>(request, "k") : 10;
  Json hits = Json::array();
  for (const auto& h : index_for(*manual).search(query, k)) {
    const auto& ins = manual->instructions[h.position];
    hits.push_back({{"id", ins.id},
                    {"score", h.score},
                    {"condition", ins.condition},
                    {"solution", ins.solution},
                    {"api", ins.api ? Json(ins.api->api) : Json(nullptr)}});
  }
  return reply({{"session", id}, {"hits", hits}});
}

Json Service::select(const std::string& id, const std::string& token, const Json& request) {
  check_version(request);
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  require(s, token, Role::agent);
  auto ids = field<std::vector<std::string>>(request, "ids");
  commit(s, {{"type", "select"}, {"ids", ids}});
  return reply({{"session", id}, {"selected", ids}, {"needs_review", ids.empty()}});
}

Json Service::submit_api(const std::string& id, const std::string& token, const Json& request) {
  check_version(request);
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  require(s, token, Role::agent);
  commit(s, {{"type", "api"}, {"call", field<Json>(request, "call")}});
  return reply({{"session", id}, {"result", s.state.log.back().result}});
}

Json Service::update_checklist(const std::string& id, const std::string& token, const Json& request) {
  check_version(request);
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  require(s, token, Role::user);
  Json event{{"type", "checklist"}};
  for (const char* key : {"check", "uncheck", "fill"}) {
    if (request.contains(key)) event[key] = field<Json>(request, key);
  }
  try {
    commit(s, std::move(event));
  } catch (const Json::exception& x) {
    throw Error(Error::Kind::schema, std::string("malformed checklist update: ") + x.what());
  }
  return reply({{"session", id}, {"checklist", checklist_json(s.state)}, {"missing", missing_items(s.state)}});
}

Json Service::finalize(const std::string& id, const std::string& token) {
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  authorize(s, token);
  commit(s, {{"type", "finalize"}});
  const auto& st = s.state;
  Json out{{"session", id}, {"status", st.status}};
  if (st.status == "incomplete") out["missing"] = missing_items(st);
  if (st.status == "failed") {
    Dialogue d = st.dialogue;
    d.completed = true;
    Json v = Json::array();
    for (const auto& x : validate(d, db_, st.manual)) v.push_back({{"field", x.field}, {"rule", x.rule}});
    out["violations"] = v;
  }
  if (st.exported) {
    out["dialogue"] = *st.exported;
    auto report = fuzzy_annotate(st.dialogue, st.log, db_, options_.fuzzy_threshold);
    Json unmatched = Json::array();
    for (const auto& u : report.unmatched) {
      unmatched.push_back({{"turn", u.turn}, {"instruction", u.instruction}, {"attribute", u.attribute}, {"value", u.value}});
    }
    out["unmatched"] = unmatched;
  }
  return reply(std::move(out));
}

Json Service::reopen(const std::string& id, const std::string& token) {
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  authorize(s, token);
  commit(s, {{"type", "reopen"}});
  return view(s.state, authorize(s, token));
}

Json Service::events(const std::string& id, const std::string& token) {
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  authorize(s, token);
  return reply({{"session", id}, {"events", s.events}});
}

std::string Service::corpus() {
  std::vector<Session*> list;
  {
    std::lock_guard lock(mutex_);
    for (const auto& id : order_) list.push_back(sessions_.at(id).get());
  }
  std::string out;
  for (auto* s : list) {
    std::lock_guard lock(s->mutex);
    if (s->state.exported) out += serialize(*s->state.exported) + "\n";
  }
  return out;
}

SessionState Service::replay(const std::string& id) {
  auto& s = session(id);
  std::lock_guard lock(s.mutex);
  SessionState state;
  for (const auto& e : s.events) apply(state, e);
  return state;
}

std::size_t Service::session_count() {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

// ---- HTTP transport ----------------------------------------------------------

namespace {

int status_of(Error::Kind k) {
  switch (k) {
    case Error::Kind::not_found: return 404;
    case Error::Kind::forbidden: return 403;
    case Error::Kind::sequencing: return 409;
    case Error::Kind::parse:
    case Error::Kind::schema:
    case Error::Kind::missing_argument:
    case Error::Kind::argument:
    case Error::Kind::validation:
    case Error::Kind::unsupported: return 400;
    default: return 500;
  }
}

std::string bearer(const httplib::Request& req) {
  auto h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  return h.rfind(prefix, 0) == 0 ? h.substr(prefix.size()) : std::string();
}

bool is_unix(const std::string& address) { return address.find(':') == std::string::npos; }

std::pair<std::string, int> host_port(const std::string& address) {
  auto colon = address.rfind(':');
  try {
    return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(Error::Kind::config, "bad address '" + address + "'");
  }
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  auto& service_ref = impl_->service;
  auto handle = [](httplib::Response& res, const std::function<Json()>& fn) {
    try {
      res.set_content(fn().dump(), "application/json");
    } catch (const Error& e) {
      res.status = status_of(e.kind());
      res.set_content(Json{{"version", kServiceVersion}, {"error", {{"kind", kind_name(e.kind())}, {"message", e.what()}}}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"version", kServiceVersion}, {"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump(),
                      "application/json");
    }
  };
  auto body = [](const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      throw ParseError(e.byte, "request body is not JSON");
    }
  };
  svr.Post("/v1/sessions", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.create_session(body(req)); });
  });
  svr.Get(R"(/v1/sessions/([^/]+))", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.read_session(req.matches[1], bearer(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/messages/(user|agent))",
           [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
             handle(res, [&] {
               auto role = req.matches[2] == "user" ? Role::user : Role::agent;
               return service_ref.post_message(req.matches[1], bearer(req), role, body(req));
             });
           });
  svr.Post(R"(/v1/sessions/([^/]+)/search)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.search(req.matches[1], bearer(req), body(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/select)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.select(req.matches[1], bearer(req), body(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/api)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.submit_api(req.matches[1], bearer(req), body(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/checklist)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.update_checklist(req.matches[1], bearer(req), body(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/finalize)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.finalize(req.matches[1], bearer(req)); });
  });
  svr.Post(R"(/v1/sessions/([^/]+)/reopen)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.reopen(req.matches[1], bearer(req)); });
  });
  svr.Get(R"(/v1/sessions/([^/]+)/events)", [=, &service_ref](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return service_ref.events(req.matches[1], bearer(req)); });
  });
  svr.Get("/v1/corpus", [&service_ref](const httplib::Request&, httplib::Response& res) {
    res.set_content(service_ref.corpus(), "application/jsonl");
  });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::listen(const std::string& address) {
  auto& svr = impl_->server;
  bool ok = false;
  if (is_unix(address)) {
    std::error_code ec;
    std::filesystem::remove(address, ec);
    svr.set_address_family(AF_UNIX);
    ok = svr.listen(address, 80);
  } else {
    auto [host, port] = host_port(address);
    ok = svr.listen(host, port);
  }
  if (!ok && !svr.is_valid()) throw Error(Error::Kind::config, "cannot listen on '" + address + "'");
}

void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

HttpReply http_request(const std::string& address, const std::string& method, const std::string& path,
                       const std::string& body, const std::string& token) {
  std::unique_ptr<httplib::Client> cli;
  if (is_unix(address)) {
    cli = std::make_unique<httplib::Client>(address);
    cli->set_address_family(AF_UNIX);
  } else {
    auto [host, port] = host_port(address);
    cli = std::make_unique<httplib::Client>(host, port);
  }
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  httplib::Result res = method == "GET" ? cli->Get(path, headers) : cli->Post(path, headers, body, "application/json");
  if (!res) throw Error(Error::Kind::config, "request to '" + address + "' failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

Json script_from_dialogue(const Dialogue& dialogue, const std::string& goal_id, std::uint64_t seed, const Database& db) {
  Json steps = Json::array();
  for (const auto& t : dialogue.turns) {
    steps.push_back({{"op", "user"}, {"text", t.user_utterance}});
    steps.push_back({{"op", "select"}, {"ids", t.selected_instructions}});
    for (auto call : t.api_calls) {
      for (auto& a : call.args) a.span.reset();
      steps.push_back({{"op", "api"}, {"call", call}});
    }
    steps.push_back({{"op", "agent"}, {"text", t.agent_response}});
  }
  auto checklist = render_goal(dialogue.goal).checklist;
  Json check = Json::array();
  for (std::size_t i = 0; i < checklist.check.size(); ++i) check.push_back(i);
  Json fill = Json::array();
  for (std::size_t i = 0; i < checklist.fill.size(); ++i) {
    const auto& r = checklist.fill[i];
    std::string value;
    for (const auto& t : dialogue.turns) {
      for (std::size_t c = 0; c < t.api_calls.size() && c < t.api_results.size(); ++c) {
        const auto* spec = db.api(t.api_calls[c].api);
        if (!spec || spec->domain != r.domain) continue;
        const auto& res = t.api_results[c];
        if (r.attribute == "reference num." && !res.reference.empty()) value = res.reference;
        if (auto it = res.values.find(r.attribute); it != res.values.end()) value = it->second;
        if (!res.entities.empty()) {
          if (const auto* v = res.entities.front().get(r.attribute)) value = *v;
        }
      }
    }
    if (value.empty()) throw Error(Error::Kind::generation, "no value for " + r.domain + "." + r.attribute);
    fill.push_back({{"index", i}, {"value", value}});
  }
  steps.push_back({{"op", "checklist"}, {"check", check}, {"fill", fill}});
  steps.push_back({{"op", "finalize"}});
  return {{"create", {{"goal", goal_id}, {"manual", dialogue.manual_id}, {"dialogue_id", dialogue.id}, {"seed", seed}}},
          {"steps", steps}};
}

ScriptClient::ScriptClient(std::string address, Json script) : address_(std::move(address)), script_(std::move(script)) {
  if (!script_.contains("create") || !script_.contains("steps") || !script_["steps"].is_array()) {
    throw Error(Error::Kind::schema, "script needs 'create' and 'steps'");
  }
}

Json ScriptClient::call(const std::string& method, const std::string& path, const Json& body, const std::string& token) {
  auto r = http_request(address_, method, path, body.dump(), token);
  Json parsed;
  try {
    parsed = Json::parse(r.body);
  } catch (const Json::exception&) {
    throw Error(Error::Kind::validation, path + ": reply is not JSON");
  }
  if (r.status != 200) throw Error(Error::Kind::validation, path + ": " + std::to_string(r.status) + " " + r.body);
  return parsed;
}

bool ScriptClient::step() {
  if (session_.empty()) {
    last_ = call("POST", "/v1/sessions", script_["create"], "");
    session_ = last_.at("session").get<std::string>();
    user_token_ = last_.at("user_token").get<std::string>();
    agent_token_ = last_.at("agent_token").get<std::string>();
    return true;
  }
  const auto& steps = script_["steps"];
  if (next_ >= steps.size()) return false;
  const auto& st = steps[next_++];
  const auto op = st.at("op").get<std::string>();
  const auto base = "/v1/sessions/" + session_;
  if (op == "user" || op == "agent") {
    last_ = call("POST", base + "/messages/" + op, {{"text", st.at("text")}}, op == "user" ? user_token_ : agent_token_);
  } else if (op == "select") {
    last_ = call("POST", base + "/select", {{"ids", st.at("ids")}}, agent_token_);
  } else if (op == "api") {
    last_ = call("POST", base + "/api", {{"call", st.at("call")}}, agent_token_);
  } else if (op == "checklist") {
    Json body = st;
    body.erase("op");
    last_ = call("POST", base + "/checklist", body, user_token_);
  } else if (op == "finalize") {
    last_ = call("POST", base + "/finalize", Json::object(), user_token_);
  } else {
    throw Error(Error::Kind::schema, "unknown script op '" + op + "'");
  }
  return true;
}

void ScriptClient::run() {
  while (step()) {
  }
}

}  // namespace magdial
