#include "magdial/bridge.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

#include "magdial/error.hpp"
#include "magdial/responder.hpp"

namespace magdial {

namespace {

Error predictor(const std::string& what) { return Error(Error::Kind::predictor, "bridge: " + what); }

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

BridgeClient::BridgeClient(BridgeOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw predictor("empty command");
  int in[2], out[2];
  if (pipe(in) != 0) throw predictor(std::strerror(errno));
  if (pipe(out) != 0) {
    close(in[0]);
    close(in[1]);
    throw predictor(std::strerror(errno));
  }
  signal(SIGPIPE, SIG_IGN);
  pid_ = fork();
  if (pid_ < 0) throw predictor(std::strerror(errno));
  if (pid_ == 0) {
    dup2(in[0], STDIN_FILENO);
    dup2(out[1], STDOUT_FILENO);
    close(in[0]);
    close(in[1]);
    close(out[0]);
    close(out[1]);
    std::vector<char*> argv;
    for (auto& a : options_.command) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  to_child_ = in[1];
  from_child_ = out[0];
}

BridgeClient::~BridgeClient() { stop(); }

void BridgeClient::stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
}

std::string BridgeClient::read_line() {
  const auto deadline = now_ms() + options_.timeout_ms;
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto left = deadline - now_ms();
    if (left <= 0) throw predictor("timeout after " + std::to_string(options_.timeout_ms) + " ms");
    pollfd p{from_child_, POLLIN, 0};
    int r = poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw predictor(std::strerror(errno));
    if (r == 0) continue;
    char buf[65536];
    auto n = read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw predictor("process closed its output");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

Json BridgeClient::call(const std::string& task, Json payload) {
  if (to_child_ < 0) throw predictor("not running");
  const auto id = next_id_++;
  payload["version"] = kBridgeVersion;
  payload["id"] = id;
  payload["task"] = task;
  std::string line = payload.dump() + "\n";
  std::size_t off = 0;
  while (off < line.size()) {
    auto n = write(to_child_, line.data() + off, line.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw predictor("process closed its input");
    off += static_cast<std::size_t>(n);
  }
  Json reply;
  try {
    reply = Json::parse(read_line());
  } catch (const Json::exception&) {
    throw predictor("malformed reply: not JSON");
  }
  if (!reply.is_object()) throw predictor("malformed reply: not an object");
  if (!reply.contains("version") || reply["version"] != kBridgeVersion) {
    throw predictor("version mismatch: expected " + std::to_string(kBridgeVersion) + ", got " +
                    (reply.contains("version") ? reply["version"].dump() : std::string("none")));
  }
  if (!reply.contains("id") || reply["id"] != id) throw predictor("malformed reply: id mismatch");
  if (reply.contains("error")) throw predictor("remote error: " + reply["error"].dump());
  return reply;
}

Json bridge_payload(const Dialogue& dialogue, int turn) {
  Json hist = Json::array();
  for (const auto& u : history(dialogue, turn)) {
    hist.push_back({{"turn", u.turn}, {"speaker", std::string(to_string(u.speaker))}, {"text", std::string(u.text)}});
  }
  return Json{{"key", {{"dialogue", dialogue.id}, {"turn", turn}}}, {"history", hist}};
}

std::vector<double> BridgeMatcher::scores(const Dialogue& dialogue, int turn, const Manual& manual) {
  auto payload = bridge_payload(dialogue, turn);
  Json ids = Json::array();
  for (const auto& ins : manual.instructions) ids.push_back(ins.id);
  payload["candidates"] = ids;
  auto reply = client_.call("match", payload);
  if (!reply.contains("scores") || !reply["scores"].is_object()) throw predictor("malformed reply: no scores");
  std::vector<double> out(manual.instructions.size(), 0.0);
  for (const auto& [id, score] : reply["scores"].items()) {
    std::size_t pos = manual.instructions.size();
    for (std::size_t i = 0; i < manual.instructions.size(); ++i) {
      if (manual.instructions[i].id == id) pos = i;
    }
    if (pos == manual.instructions.size()) throw predictor("malformed reply: unknown instruction '" + id + "'");
    if (!score.is_number() || score.get<double>() < 0.0 || score.get<double>() > 1.0) {
      throw predictor("malformed reply: score for '" + id + "' outside [0, 1]");
    }
    out[pos] = score.get<double>();
  }
  return out;
}

TagSequence BridgeTagger::tag(const Dialogue& dialogue, int turn, const Instruction& instruction) {
  TagSequence seq;
  seq.tokens = history_tokens(dialogue, turn);
  seq.max_args = max_args_;
  auto payload = bridge_payload(dialogue, turn);
  payload["instruction"] = instruction.id;
  payload["max_args"] = max_args_;
  Json toks = Json::array();
  for (const auto& t : seq.tokens) toks.push_back(t.text);
  payload["tokens"] = toks;
  auto reply = client_.call("tag", payload);
  if (!reply.contains("tags") || !reply["tags"].is_array() || reply["tags"].size() != seq.tokens.size()) {
    throw predictor("malformed reply: tag count differs from token count");
  }
  for (const auto& t : reply["tags"]) {
    if (!t.is_string()) throw predictor("malformed reply: tag is not a string");
    try {
      seq.tags.push_back(tag_from_string(t.get<std::string>()));
    } catch (const Error&) {
      throw predictor("malformed reply: bad tag " + t.dump());
    }
    if (seq.tags.back().index > max_args_) throw predictor("malformed reply: tag index above max_args");
  }
  return seq;
}

std::string bridge_generate(BridgeClient& client, const Dialogue& dialogue, int turn) {
  auto payload = bridge_payload(dialogue, turn);
  const auto& t = dialogue.turns.at(static_cast<std::size_t>(turn));
  payload["instructions"] = t.selected_instructions;
  payload["results"] = t.api_results;
  auto reply = client.call("generate", payload);
  if (!reply.contains("text") || !reply["text"].is_string()) throw predictor("malformed reply: no text");
  return reply["text"].get<std::string>();
}

std::string generate_response(BridgeClient* client, const Dialogue& dialogue, int turn, const Manual& manual,
                              std::uint64_t seed) {
  if (client) {
    try {
      return bridge_generate(*client, dialogue, turn);
    } catch (const Error& e) {
      std::cerr << "generate: falling back to native realization (" << e.what() << ")\n";
    }
  } else {
    std::cerr << "generate: no generator bridge, using native realization\n";
  }
  const auto& t = dialogue.turns.at(static_cast<std::size_t>(turn));
  std::vector<const Instruction*> selected;
  for (const auto& id : t.selected_instructions) {
    if (const auto* ins = manual.find(id)) selected.push_back(ins);
  }
  return realize(selected, t.api_calls, t.api_results, {}, seed).text;
}

}  // namespace magdial
