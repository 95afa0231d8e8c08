#pragma once

// Experiment driver: split enforcement, subtask evaluation, data-size and
// manual-count sweeps, leave-one-domain-out.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "magdial/bridge.hpp"
#include "magdial/metrics.hpp"
#include "magdial/nlu.hpp"
#include "magdial/simulator.hpp"

namespace magdial {

struct PredictorConfig {
  // pair: fitted lexical model; lexical: unfitted TF-IDF cosine.
  std::string matcher = "pair";  // pair | lexical | oracle | empty | bridge
  std::string tagger = "lexicon";   // lexicon | oracle | empty | bridge
  std::string generator = "native";  // native | oracle | bridge | none
  std::vector<std::string> bridge_command;
  int bridge_timeout_ms = 5000;
  Objective objective = Objective::f1;
  // Fixed matching threshold; picked on the dev split when absent.
  std::optional<double> threshold;
  PairMatcherOptions pair;
  // Concurrent sweep points; 0 uses the hardware concurrency.
  unsigned jobs = 0;
  int max_args = kDefaultMaxArgs;
  double fuzzy_threshold = kFuzzyThreshold;
  // Shell command run before evaluation with MAGDIAL_TRAIN_FILE and
  // MAGDIAL_WORKDIR set; its exit status is recorded.
  std::string train_hook;
  std::string workdir;
};

void to_json(Json& j, const PredictorConfig& v);
void from_json(const Json& j, PredictorConfig& v);

struct Experiment {
  const Database* db = nullptr;
  std::map<std::string, const Manual*> manuals;
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
  std::set<std::string> held_out;  // manual ids reserved for the test split
  // Training manuals in partition order.
  std::vector<std::string> train_manuals;
};

// Held-out ids come from the manifest's test manuals plus every manual used in
// the test split.
Experiment make_experiment(const Database& db, const std::vector<Manual>& manuals, const Corpus& corpus);

// Throws Error(split_leakage) if any dialogue uses a held-out manual.
void check_split(const std::vector<Dialogue>& training, const std::set<std::string>& held_out);

struct TurnKey {
  std::string dialogue;
  int turn = 0;
};

struct MatchingReport {
  double threshold = 0.0;
  double accuracy = 0.0;
  PRFReport prf;
  std::vector<TurnKey> keys;
  std::vector<LabelSet> predicted;
  std::vector<LabelSet> gold;
};

// Over turns with at least one selected API instruction; the label of an
// argument is "instruction|k|normalized value".
struct TaggingReport {
  double token_accuracy = 0.0;
  PRFReport prf;
  std::size_t sequences = 0;
  std::vector<TurnKey> keys;
  std::vector<LabelSet> predicted;
  std::vector<LabelSet> gold;
};

struct GenerationReport {
  double bleu = 0.0;
  AerReport aer;
  std::size_t turns = 0;
};

struct SubtaskReport {
  std::string config_hash;
  std::size_t train_dialogues = 0;
  double threshold = 0.0;
  MatchingReport dev_matching;
  MatchingReport matching;
  TaggingReport tagging;
  TaggingReport tagging_without_manual;
  std::optional<GenerationReport> generation;
  std::optional<int> hook_status;
};

// Matcher scores of every turn of a split.
struct ScoredSet {
  std::vector<TurnKey> keys;
  std::vector<ScoredTurn> turns;
  std::vector<std::string> manuals;  // manual id per turn
};

class Evaluator {
 public:
  Evaluator(const Experiment& experiment, PredictorConfig config);
  ~Evaluator();

  ScoredSet score(const std::vector<Dialogue>& dialogues);
  // Configured threshold, or the operating point on `scored`.
  double fit_threshold(const ScoredSet& scored) const;
  MatchingReport evaluate_matching(const ScoredSet& scored, double threshold) const;
  TaggingReport evaluate_tagging(const std::vector<Dialogue>& dialogues, bool use_manual);
  GenerationReport evaluate_generation(const std::vector<Dialogue>& dialogues);
  std::optional<int> run_hook(const std::vector<Dialogue>& training, const std::string& workdir) const;

  // Fits the matcher when it learns from data.
  void fit(const std::vector<Dialogue>& training);

  // Full run; `training` and `dev` default to the experiment's splits.
  SubtaskReport run(const std::vector<Dialogue>* training = nullptr, const std::vector<Dialogue>* dev = nullptr,
                    const std::string& workdir = "");

  const PredictorConfig& config() const { return config_; }

 private:
  Tagger& tagger(bool use_manual);
  const Manual& manual_of(const Dialogue& d) const;
  const ScoredSet& cached(const std::string& split);
  bool fitted_matcher() const;

  const Experiment& exp_;
  PredictorConfig config_;
  std::unique_ptr<BridgeClient> bridge_;
  std::unique_ptr<Matcher> matcher_;
  std::unique_ptr<Tagger> tagger_;
  std::unique_ptr<Tagger> ablation_;
  std::map<std::string, ScoredSet> cache_;
  std::map<bool, TaggingReport> tagging_cache_;
};

SubtaskReport run_subtask_eval(const Experiment& experiment, const PredictorConfig& config);

struct CurvePoint {
  double x = 0.0;
  std::size_t train_dialogues = 0;
  std::vector<std::string> train_manuals;
  double threshold = 0.0;
  double matching_f1 = 0.0;
  double tagging_f1 = 0.0;
  std::optional<int> hook_status;
};

// Each fraction takes a prefix of a seeded permutation of the train split.
// Throws Error(argument) for fractions outside (0, 1].
std::vector<CurvePoint> sweep_data_size(const Experiment& experiment, const PredictorConfig& config,
                                        const std::vector<double>& fractions, std::uint64_t seed);

// Keeps train dialogues of the first `count` training manuals; the test split
// is unchanged. Throws Error(argument) for counts outside [1, #train manuals].
std::vector<CurvePoint> sweep_manual_count(const Experiment& experiment, const PredictorConfig& config,
                                           const std::vector<std::size_t>& counts);

struct LodoRow {
  std::string excluded;  // "Full" for no exclusion
  std::size_t train_dialogues = 0;
  std::map<DomainName, double> matching_f1;
  std::map<DomainName, double> tagging_f1;
};

// One row per entry of `excluded` (use "Full" for none). Dialogues involving
// the domain are removed from train and dev; columns are the domains of the
// test turns' gold instructions.
std::vector<LodoRow> leave_one_domain_out(const Experiment& experiment, const PredictorConfig& config,
                                          const std::vector<std::string>& excluded);

bool involves(const Dialogue& dialogue, const DomainName& domain);

// Domains of the turn's gold instructions.
std::set<DomainName> turn_domains(const Dialogue& dialogue, int turn, const Manual& manual);

// Hex digest of the serialized config.
std::string config_hash(const PredictorConfig& config);

void to_json(Json& j, const MatchingReport& v);
void to_json(Json& j, const TaggingReport& v);
void to_json(Json& j, const GenerationReport& v);
void to_json(Json& j, const SubtaskReport& v);
void to_json(Json& j, const CurvePoint& v);
void to_json(Json& j, const LodoRow& v);

}  // namespace magdial
