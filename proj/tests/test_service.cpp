#include <filesystem>
#include <thread>

#include <unistd.h>

#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"
#include "magdial/service.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

namespace {

const std::vector<UserGoal>& goals() {
  static const auto g = sample_goals(testing::world().db, 7, 200);
  return g;
}

std::unique_ptr<Service> make_service(std::uint64_t token_seed = 1) {
  ServiceOptions o;
  o.token_seed = token_seed;
  return std::make_unique<Service>(testing::world().db, testing::world().manuals, goals(), o);
}

Error::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return Error::Kind::parse;
}

struct Running {
  explicit Running(Service& s, std::string addr) : server(s), address(std::move(addr)) {
    std::filesystem::remove(address);
    thread = std::thread([this] { server.listen(address); });
    server.wait_until_ready();
  }
  ~Running() {
    server.stop();
    thread.join();
    std::filesystem::remove(address);
  }
  HttpServer server;
  std::string address;
  std::thread thread;
};

std::string socket_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("magdial-" + name + ".sock")).string();
}

}  // namespace

TEST_CASE("sessions enforce roles and turn order") {
  auto svc = make_service();
  auto c = svc->create_session({{"goal", "g0003"}, {"manual", "m01"}});
  const auto id = c["session"].get<std::string>();
  const auto user = c["user_token"].get<std::string>();
  const auto agent = c["agent_token"].get<std::string>();
  CHECK(id == "s0001");
  CHECK(user != agent);
  CHECK(kind_of([&] { svc->post_message(id, agent, Role::user, {{"text", "hi"}}); }) == Error::Kind::forbidden);
  CHECK(kind_of([&] { svc->post_message(id, "bogus", Role::user, {{"text", "hi"}}); }) == Error::Kind::forbidden);
  CHECK(kind_of([&] { svc->post_message(id, agent, Role::agent, {{"text", "hello"}}); }) == Error::Kind::sequencing);
  CHECK(kind_of([&] { svc->select(id, user, {{"ids", Json::array()}}); }) == Error::Kind::forbidden);
  CHECK(kind_of([&] { svc->update_checklist(id, agent, {{"check", {0}}}); }) == Error::Kind::forbidden);
  CHECK(kind_of([&] { svc->read_session("s9999", user); }) == Error::Kind::not_found);
  CHECK(kind_of([&] { svc->create_session({{"goal", "nope"}, {"manual", "m01"}}); }) == Error::Kind::not_found);
  CHECK(kind_of([&] { svc->create_session({{"manual", "m01"}}); }) == Error::Kind::missing_argument);
  CHECK(kind_of([&] { svc->create_session({{"goal", "g0003"}, {"manual", "m01"}, {"version", 2}}); }) ==
        Error::Kind::schema);

  svc->post_message(id, user, Role::user, {{"text", "I need a place to stay"}});
  CHECK(kind_of([&] { svc->post_message(id, user, Role::user, {{"text", "again"}}); }) == Error::Kind::sequencing);
  CHECK(kind_of([&] { svc->select(id, agent, {{"ids", {"m01/unknown"}}}); }) == Error::Kind::not_found);
  std::vector<std::string> eleven;
  for (std::size_t i = 0; i < 11; ++i) eleven.push_back(testing::world().manuals[1].instructions[i].id);
  CHECK(kind_of([&] { svc->select(id, agent, {{"ids", eleven}}); }) == Error::Kind::validation);
  CHECK(kind_of([&] { svc->finalize(id, user); }) == Error::Kind::sequencing);
  auto hits = svc->search(id, agent, {{"query", "hotel in the north"}, {"k", 3}});
  CHECK(hits["hits"].size() == 3);
  svc->select(id, agent, {{"ids", Json::array()}});
  auto v = svc->post_message(id, agent, Role::agent, {{"text", "Which area?"}});
  CHECK(v["turns"][0]["needs_review"] == true);

  auto uv = svc->read_session(id, user);
  CHECK(uv.contains("goal"));
  CHECK_FALSE(uv.contains("manual"));
  CHECK_FALSE(uv["turns"][0].contains("selected_instructions"));
  auto av = svc->read_session(id, agent);
  CHECK(av["manual"] == "m01");
  CHECK_FALSE(av.contains("goal"));
}

TEST_CASE("incomplete checklist blocks export until reopened") {
  auto svc = make_service();
  auto c = svc->create_session({{"goal", "g0003"}, {"manual", "m01"}});
  const auto id = c["session"].get<std::string>();
  const auto user = c["user_token"].get<std::string>();
  const auto agent = c["agent_token"].get<std::string>();
  svc->post_message(id, user, Role::user, {{"text", "hello"}});
  svc->post_message(id, agent, Role::agent, {{"text", "hi, how can I help?"}});
  auto f = svc->finalize(id, user);
  CHECK(f["status"] == "incomplete");
  CHECK_FALSE(f["missing"].empty());
  CHECK(kind_of([&] { svc->post_message(id, user, Role::user, {{"text", "x"}}); }) == Error::Kind::sequencing);
  svc->reopen(id, agent);
  CHECK(svc->read_session(id, user)["status"] == "open");
  CHECK(kind_of([&] { svc->update_checklist(id, user, {{"check", {99}}}); }) == Error::Kind::argument);
  CHECK(svc->corpus().empty());
}

TEST_CASE("event log replay rebuilds the session state") {
  auto svc = make_service();
  auto script = testing::fixture("service_script.json");
  auto c = svc->create_session(script["create"]);
  const auto id = c["session"].get<std::string>();
  const auto user = c["user_token"].get<std::string>();
  const auto agent = c["agent_token"].get<std::string>();
  for (const auto& st : script["steps"]) {
    const auto op = st["op"].get<std::string>();
    if (op == "user") svc->post_message(id, user, Role::user, st);
    if (op == "agent") svc->post_message(id, agent, Role::agent, st);
    if (op == "select") svc->select(id, agent, st);
    if (op == "api") svc->submit_api(id, agent, st);
    if (op == "checklist") svc->update_checklist(id, user, st);
    if (op == "finalize") CHECK(svc->finalize(id, user)["status"] == "completed");
  }
  auto replayed = svc->replay(id);
  auto events = svc->events(id, agent)["events"];
  CHECK(events.front()["type"] == "created");
  for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i]["seq"] == i);
  REQUIRE(replayed.exported);
  CHECK(serialize(*replayed.exported) + "\n" == svc->corpus());
  CHECK(replayed.dialogue == svc->replay(id).dialogue);
  CHECK(validate(*replayed.exported, testing::world().db, replayed.manual).empty());
  CHECK(kind_of([&] { svc->reopen(id, user); }) == Error::Kind::sequencing);
}

TEST_CASE("scripted session over a unix socket reproduces the fixture export") {
  auto svc = make_service();
  Running run(*svc, socket_path("replay"));
  ScriptClient client(run.address, testing::fixture("service_script.json"));
  client.run();
  CHECK(client.last_reply()["status"] == "completed");
  auto corpus = http_request(run.address, "GET", "/v1/corpus");
  CHECK(corpus.status == 200);
  CHECK(corpus.body == read_file(testing::fixture_path("service_export.jsonl")));
}

TEST_CASE("interleaved sessions export the same dialogues") {
  auto solo = [](const std::string& name) {
    auto svc = make_service(3);
    Running run(*svc, socket_path("solo"));
    ScriptClient c(run.address, testing::fixture(name));
    c.run();
    return http_request(run.address, "GET", "/v1/corpus").body;
  };
  const auto a = solo("service_script.json");
  const auto b = solo("service_script_b.json");
  auto svc = make_service(4);
  Running run(*svc, socket_path("interleave"));
  ScriptClient ca(run.address, testing::fixture("service_script.json"));
  ScriptClient cb(run.address, testing::fixture("service_script_b.json"));
  bool more_a = true, more_b = true;
  while (more_a || more_b) {
    if (more_b) more_b = cb.step();
    if (more_a) more_a = ca.step();
  }
  CHECK(http_request(run.address, "GET", "/v1/corpus").body == b + a);
}

TEST_CASE("tcp transport serves the same routes") {
  auto svc = make_service();
  const auto port = 20000 + static_cast<int>(::getpid() % 20000);
  Running run(*svc, "127.0.0.1:" + std::to_string(port));
  auto r = http_request(run.address, "POST", "/v1/sessions", R"({"goal":"g0002","manual":"m03"})");
  CHECK(r.status == 200);
  CHECK(Json::parse(r.body)["session"] == "s0001");
}

TEST_CASE("http errors over the unix socket") {
  auto svc = make_service();
  Running run(*svc, socket_path("errors"));
  auto r = http_request(run.address, "GET", "/v1/sessions/s0001");
  CHECK(r.status == 404);
  auto body = Json::parse(r.body);
  CHECK(body["version"] == 1);
  CHECK(body["error"]["kind"] == "not_found");
  auto created = Json::parse(http_request(run.address, "POST", "/v1/sessions", R"({"goal":"g0001","manual":"m00"})").body);
  const auto id = created["session"].get<std::string>();
  CHECK(http_request(run.address, "GET", "/v1/sessions/" + id).status == 403);
  CHECK(http_request(run.address, "POST", "/v1/sessions/" + id + "/messages/agent", R"({"text":"hi"})",
                     created["agent_token"].get<std::string>())
            .status == 409);
  CHECK(http_request(run.address, "POST", "/v1/sessions", "{not json").status == 400);
  CHECK(http_request(run.address, "GET", "/v1/sessions/" + id, "", created["user_token"].get<std::string>()).status ==
        200);
}
