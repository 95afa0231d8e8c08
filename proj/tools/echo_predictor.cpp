// Bridge predictor that answers from the gold annotations of corpus files.
// Modes other than "gold" misbehave on purpose for protocol tests.

#include <chrono>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "magdial/bridge.hpp"
#include "magdial/error.hpp"
#include "magdial/nlu.hpp"
#include "magdial/serialize.hpp"

using namespace magdial;

namespace {

std::map<std::pair<std::string, int>, const Turn*> index_turns(const std::vector<Dialogue>& dialogues,
                                                              std::map<std::string, const Dialogue*>& by_id) {
  std::map<std::pair<std::string, int>, const Turn*> out;
  for (const auto& d : dialogues) {
    by_id[d.id] = &d;
    for (const auto& t : d.turns) out[{d.id, t.index}] = &t;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bridge predictor answering from gold corpus annotations"};
  std::vector<std::string> corpora;
  std::string mode = "gold";
  int slow_ms = 60000;
  app.add_option("--corpus", corpora, "Corpus JSONL file (repeatable)")->required();
  app.add_option("--mode", mode, "gold | unknown-id | abstain | slow | bad-version | garbage")
      ->check(CLI::IsMember({"gold", "unknown-id", "abstain", "slow", "bad-version", "garbage"}));
  app.add_option("--slow-ms", slow_ms, "Delay per reply in slow mode");
  CLI11_PARSE(app, argc, argv);

  std::vector<Dialogue> dialogues;
  try {
    for (const auto& path : corpora) {
      auto part = load_corpus(path);
      dialogues.insert(dialogues.end(), part.begin(), part.end());
    }
  } catch (const Error& e) {
    std::cerr << "echo_predictor: " << e.what() << "\n";
    return 2;
  }
  std::map<std::string, const Dialogue*> by_id;
  const auto turns = index_turns(dialogues, by_id);

  std::string line;
  while (std::getline(std::cin, line)) {
    Json req;
    try {
      req = Json::parse(line);
    } catch (const Json::exception&) {
      std::cout << Json{{"version", kBridgeVersion}, {"error", "request is not JSON"}}.dump() << std::endl;
      continue;
    }
    Json rep{{"version", mode == "bad-version" ? kBridgeVersion + 1 : kBridgeVersion}, {"id", req.value("id", 0)}};
    if (mode == "garbage") {
      std::cout << "not json {" << std::endl;
      continue;
    }
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(slow_ms));
    const auto task = req.value("task", "");
    const auto id = req["key"].value("dialogue", "");
    const int turn = req["key"].value("turn", -1);
    auto it = turns.find({id, turn});
    if (it == turns.end()) {
      rep["error"] = "unknown turn " + id + "/" + std::to_string(turn);
      std::cout << rep.dump() << std::endl;
      continue;
    }
    const Turn& t = *it->second;
    if (task == "match") {
      Json scores = Json::object();
      if (mode != "abstain") {
        for (const auto& c : req["candidates"]) {
          const auto cid = c.get<std::string>();
          for (const auto& s : t.selected_instructions) {
            if (s == cid) scores[cid] = 1.0;
          }
        }
        if (mode == "unknown-id") scores["no-such-instruction"] = 1.0;
      }
      rep["scores"] = scores;
    } else if (task == "tag") {
      const auto ins = req.value("instruction", "");
      const int max_args = req.value("max_args", kDefaultMaxArgs);
      std::vector<ArgSpan> spans;
      if (mode != "abstain") {
        for (const auto& a : t.argument_annotations) {
          if (a.instruction == ins && a.index <= max_args) spans.push_back({a.index, a.span});
        }
      }
      try {
        auto seq = encode(spans, history_tokens(*by_id.at(id), turn), max_args);
        Json tags = Json::array();
        for (const auto& tag : seq.tags) tags.push_back(to_string(tag));
        rep["tags"] = tags;
      } catch (const Error& e) {
        rep["error"] = e.what();
      }
    } else if (task == "generate") {
      rep["text"] = mode == "abstain" ? "" : t.agent_response;
    } else {
      rep["error"] = "unknown task '" + task + "'";
    }
    std::cout << rep.dump() << std::endl;
  }
  return 0;
}
