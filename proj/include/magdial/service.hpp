#pragma once

// Collection service: live manual-guided sessions with separate user and
// agent capabilities. Every session is an append-only event log; its state is
// the fold of that log. Endpoints and payloads are listed in
// docs/service-interface.md.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "magdial/api_engine.hpp"
#include "magdial/goal_sampler.hpp"
#include "magdial/model.hpp"
#include "magdial/nlu.hpp"
#include "magdial/search_index.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

inline constexpr int kServiceVersion = 1;

enum class Role { user, agent };

std::string_view to_string(Role r);

enum class Phase { awaiting_user, awaiting_agent };

struct SessionState {
  std::string id;
  std::string goal_id;
  const Manual* manual = nullptr;
  Dialogue dialogue;
  SessionDbState db_state;
  std::vector<CallRecord> log;
  Checklist checklist;
  std::vector<bool> checked;
  std::vector<std::string> filled;
  Phase phase = Phase::awaiting_user;
  std::string status = "open";  // open | incomplete | failed | completed
  std::optional<Dialogue> exported;
};

struct ServiceOptions {
  // Seed of the capability tokens; drawn from the OS when absent. Tokens never
  // appear in exports.
  std::optional<std::uint64_t> token_seed;
  double fuzzy_threshold = kFuzzyThreshold;
};

class Service {
 public:
  Service(const Database& db, const std::vector<Manual>& manuals, std::vector<UserGoal> goals,
          ServiceOptions options = {});

  // Request payloads and replies are the JSON bodies of the HTTP endpoints.
  // Errors throw magdial::Error; a token of the wrong role throws
  // Error(forbidden).
  Json create_session(const Json& request);
  Json read_session(const std::string& id, const std::string& token);
  Json post_message(const std::string& id, const std::string& token, Role role, const Json& request);
  Json search(const std::string& id, const std::string& token, const Json& request);
  Json select(const std::string& id, const std::string& token, const Json& request);
  Json submit_api(const std::string& id, const std::string& token, const Json& request);
  Json update_checklist(const std::string& id, const std::string& token, const Json& request);
  Json finalize(const std::string& id, const std::string& token);
  Json reopen(const std::string& id, const std::string& token);
  Json events(const std::string& id, const std::string& token);
  // Completed exports in session order, one JSON line each.
  std::string corpus();

  // State rebuilt from the session's event log alone.
  SessionState replay(const std::string& id);

  std::size_t session_count();

 private:
  struct Session {
    std::mutex mutex;
    std::vector<Json> events;
    SessionState state;
    std::string user_token;
    std::string agent_token;
  };

  Session& session(const std::string& id);
  Role authorize(const Session& s, const std::string& token) const;
  void require(const Session& s, const std::string& token, Role role) const;
  // Applies the event to a copy of the state and commits both on success.
  void commit(Session& s, Json event);
  void apply(SessionState& state, const Json& event) const;
  const SearchIndex& index_for(const Manual& manual);
  std::string token(const std::string& session, Role role) const;
  Json view(const SessionState& state, Role role) const;

  const Database& db_;
  std::map<std::string, const Manual*> manuals_;
  std::map<std::string, UserGoal> goals_;
  ServiceOptions options_;
  std::uint64_t token_seed_ = 0;

  std::mutex mutex_;  // guards sessions_, order_ and indexes_
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::vector<std::string> order_;
  std::map<std::string, std::unique_ptr<SearchIndex>> indexes_;
};

// HTTP transport. An address is a Unix socket path, or "host:port" for TCP.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  // Blocks until stop(). Throws Error(config) when the address cannot be bound.
  void listen(const std::string& address);
  void wait_until_ready();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One request over the same transport, for scripted clients and tests.
struct HttpReply {
  int status = 0;
  std::string body;
};
HttpReply http_request(const std::string& address, const std::string& method, const std::string& path,
                       const std::string& body = "", const std::string& token = "");

// Drives one session from a script over the HTTP transport:
// {"create": {create request}, "steps": [{"op": "user" | "agent", "text"},
//  {"op": "select", "ids"}, {"op": "api", "call"}, {"op": "checklist", ...},
//  {"op": "finalize"}]}
// Script that replays a recorded dialogue through the service: messages,
// selections and calls per turn, then every checklist item and finalize. Fill
// values are the latest matching values in the dialogue's API results.
Json script_from_dialogue(const Dialogue& dialogue, const std::string& goal_id, std::uint64_t seed, const Database& db);

class ScriptClient {
 public:
  ScriptClient(std::string address, Json script);
  // Runs the next step; false once the script is exhausted. Throws
  // Error(validation) when the service rejects a step.
  bool step();
  void run();
  const std::string& session() const { return session_; }
  const Json& last_reply() const { return last_; }

 private:
  Json call(const std::string& method, const std::string& path, const Json& body, const std::string& token);

  std::string address_;
  Json script_;
  std::size_t next_ = 0;
  std::string session_;
  std::string user_token_;
  std::string agent_token_;
  Json last_;
};

}  // namespace magdial
