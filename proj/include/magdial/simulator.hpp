#pragma once

// Rule-based self-play: an agenda-driven user and an oracle (or model-driven)
// agent produce fully annotated dialogues and corpora with held-out manuals.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magdial/api_engine.hpp"
#include "magdial/goal_sampler.hpp"
#include "magdial/model.hpp"
#include "magdial/nlu.hpp"
#include "magdial/responder.hpp"
#include "magdial/rng.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

// Surface templates of the user and of the agent's small talk. Slots:
// {dom} domain word, {c} joined constraint phrases, {m}/{m1}/{m2} attribute
// words, {v} value, {name} entity name, {ref} booking reference.
struct UtterancePack {
  std::map<std::string, std::vector<std::string>> acts;
  // Constraint phrase per attribute, with a {v} slot.
  std::map<Attribute, std::vector<std::string>> phrases;
  // How the user names an attribute; the attribute itself when absent.
  std::map<Attribute, std::vector<std::string>> words;
  std::map<DomainName, std::vector<std::string>> domains;
};

void to_json(Json& j, const UtterancePack& v);
void from_json(const Json& j, UtterancePack& v);

const UtterancePack& default_pack();

enum class ActKind { greet, inform, request, book, edit, cancel, rebook, bye };

std::string_view to_string(ActKind k);

struct UserAct {
  ActKind kind = ActKind::greet;
  DomainName domain;
  std::vector<Constraint> constraints;
  std::vector<Attribute> requests;
  bool operator==(const UserAct&) const = default;
};

struct UserLedger {
  std::vector<Constraint> constraints;
  std::vector<bool> expressed;
  std::vector<bool> checked;
  std::vector<Request> requests;
  std::vector<std::string> filled;  // empty while open

  explicit UserLedger(const UserGoal& goal = {});
  bool completed() const;
  // Marks checks and fills from a finished agent turn.
  void observe(const Turn& turn, const Database& db);
  void express(const Constraint& c);
};

struct SimulatorConfig {
  std::size_t max_turns = 20;
  double greet_probability = 0.3;
  double pair_chunk_probability = 0.8;
  double two_requests_probability = 0.5;
  double merge_request_book_probability = 0.5;
  double merge_domain_switch_probability = 0.5;
  double ask_next_probability = 0.6;
  double more_probability = 0.6;
  double rebook_probability = 0.05;
  double say_name_probability = 0.5;
  UtterancePack pack = default_pack();
};

void to_json(Json& j, const SimulatorConfig& v);
void from_json(const Json& j, SimulatorConfig& v);

struct UserTurn {
  std::string text;
  std::vector<UserAct> acts;
};

class UserSimulator {
 public:
  UserSimulator(const UserGoal& goal, const Database& db, const SimulatorConfig& config, std::uint64_t seed);

  // Reads the previous agent turn (null before the first one), then produces
  // the next utterance. nullopt once the agenda is exhausted and the goal is
  // complete.
  std::optional<UserTurn> step(const Turn* last);

  // Acts planned for the next turn, null when the agenda is exhausted.
  const std::vector<UserAct>* peek() const;

  const UserLedger& ledger() const { return ledger_; }
  bool completed() const { return ledger_.completed(); }

 private:
  std::string realize(const std::vector<UserAct>& acts);
  std::string phrase(const Constraint& c);
  std::string word(const Attribute& a);
  std::string pick(const std::string& act);
  std::vector<std::vector<UserAct>> repair();

  const Database& db_;
  const SimulatorConfig& config_;
  Rng rng_;
  UserLedger ledger_;
  std::vector<std::vector<UserAct>> agenda_;
  std::size_t next_ = 0;
  std::map<DomainName, std::string> entity_;  // last recommended entity per domain
  std::map<DomainName, std::string> reference_;
  bool said_bye_ = false;
};

enum class AgentMode { oracle, model };

struct Predictors {
  Matcher* matcher = nullptr;
  Tagger* tagger = nullptr;
  double threshold = 0.5;
};

class AgentSimulator {
 public:
  AgentSimulator(const Database& db, const Manual& manual, const SimulatorConfig& config, std::uint64_t seed,
                 AgentMode mode = AgentMode::oracle, Predictors predictors = {});

  // Completes dialogue.turns.back(), whose user utterance is set. `acts` are
  // the user's acts and `upcoming` the acts planned for the next user turn
  // (null when none); both are read by the oracle only.
  void step(Dialogue& dialogue, const std::vector<UserAct>& acts, const std::vector<UserAct>* upcoming);

  const SessionDbState& state() const { return state_; }
  const std::vector<CallRecord>& log() const { return log_; }

 private:
  void oracle(Dialogue& dialogue, const std::vector<UserAct>& acts, const std::vector<UserAct>* upcoming);
  void model(Dialogue& dialogue);
  const Instruction& instruction(const std::string& family) const;
  void call(Dialogue& dialogue, const Instruction& ins, const std::vector<std::pair<Attribute, std::string>>& args);
  void respond(Dialogue& dialogue, const std::vector<const Instruction*>& selected);

  const Database& db_;
  const Manual& manual_;
  const SimulatorConfig& config_;
  Rng rng_;
  AgentMode mode_;
  Predictors predictors_;
  SessionDbState state_;
  std::vector<CallRecord> log_;
  std::map<DomainName, std::string> entity_;
  std::map<DomainName, std::string> reference_;
  std::map<DomainName, int> style_;
};

// Latest verbatim, token-aligned occurrence of `value` in D_t.
std::optional<Span> oracle_span(const std::vector<Utterance>& history, std::string_view value);

struct SelfPlayResult {
  Dialogue dialogue;
  std::vector<CallRecord> log;
  bool completed = false;
};

SelfPlayResult self_play(const UserGoal& goal, const Manual& manual, const Database& db, std::uint64_t seed,
                         const SimulatorConfig& config = {}, AgentMode mode = AgentMode::oracle,
                         Predictors predictors = {});

struct CorpusConfig {
  std::uint64_t seed = 7;
  std::size_t train = 900;
  std::size_t dev = 100;
  std::size_t test = 100;
  // Positions into the manual list.
  std::vector<std::size_t> train_manuals{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::size_t> test_manuals{10, 11, 12, 13};
  GoalConfig goals;
  SimulatorConfig simulator;
};

void to_json(Json& j, const CorpusConfig& v);
void from_json(const Json& j, CorpusConfig& v);

struct Corpus {
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
  std::size_t failed = 0;
  Json manifest;
};

// Throws Error(generation) when the goals run out, Error(config) on an
// invalid manual partition.
Corpus generate_corpus(const Database& db, const std::vector<Manual>& manuals, const CorpusConfig& config);

struct CorpusStats {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  double turns_per_dialogue = 0.0;
  double instructions_per_turn = 0.0;
  double args_per_turn = 0.0;
  double no_instruction_share = 0.0;
};

CorpusStats corpus_stats(const std::vector<Dialogue>& dialogues);
void to_json(Json& j, const CorpusStats& v);

// Writes train/dev/test .jsonl and manifest.json into `dir`.
void save_corpus_dir(const std::string& dir, const Corpus& corpus);
Corpus load_corpus_dir(const std::string& dir);

}  // namespace magdial
