#pragma once

// External predictor bridge: a child process speaking one JSON object per
// line on stdin/stdout.
//
// Request: {"version": 1, "id": n, "task": "match" | "tag" | "generate",
//           "key": {"dialogue": id, "turn": t},
//           "history": [{"turn", "speaker", "text"}], ...task fields}
//   match:    "candidates": [instruction ids]
//   tag:      "instruction": id, "tokens": [surface], "max_args": n
//   generate: "instructions": [ids], "results": [ApiResult]
// Reply:   {"version": 1, "id": n, "scores": {id: score}} | {"tags": [...]} |
//          {"text": "..."} | {"error": "..."}

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "magdial/model.hpp"
#include "magdial/nlu.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

inline constexpr int kBridgeVersion = 1;

struct BridgeOptions {
  std::vector<std::string> command;
  int timeout_ms = 5000;
};

class BridgeClient {
 public:
  // Throws Error(predictor) when the process cannot be started.
  explicit BridgeClient(BridgeOptions options);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  // One round trip. Timeouts, closed pipes, version mismatches and malformed
  // or error replies throw Error(predictor).
  Json call(const std::string& task, Json payload);

 private:
  std::string read_line();
  void stop();

  BridgeOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::uint64_t next_id_ = 1;
  std::string buffer_;
};

// History and key fields shared by every request.
Json bridge_payload(const Dialogue& dialogue, int turn);

class BridgeMatcher : public Matcher {
 public:
  explicit BridgeMatcher(BridgeClient& client) : client_(client) {}
  std::vector<double> scores(const Dialogue& dialogue, int turn, const Manual& manual) override;

 private:
  BridgeClient& client_;
};

class BridgeTagger : public Tagger {
 public:
  BridgeTagger(BridgeClient& client, int max_args = kDefaultMaxArgs) : client_(client), max_args_(max_args) {}
  TagSequence tag(const Dialogue& dialogue, int turn, const Instruction& instruction) override;

 private:
  BridgeClient& client_;
  int max_args_;
};

// Free-text response for `turn` from the bridge.
std::string bridge_generate(BridgeClient& client, const Dialogue& dialogue, int turn);

// bridge_generate when a client is given and answers; otherwise the native
// realization of the turn's selected instructions. Fallbacks are reported on
// stderr.
std::string generate_response(BridgeClient* client, const Dialogue& dialogue, int turn, const Manual& manual,
                              std::uint64_t seed);

}  // namespace magdial
