#include "magdial/eval.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "magdial/api_engine.hpp"
#include "magdial/error.hpp"
#include "magdial/rng.hpp"
#include "magdial/text.hpp"

namespace magdial {

namespace {

class OracleMatcher : public Matcher {
 public:
  std::vector<double> scores(const Dialogue& dialogue, int turn, const Manual& manual) override {
    const auto& sel = dialogue.turns.at(static_cast<std::size_t>(turn)).selected_instructions;
    std::vector<double> out;
    for (const auto& ins : manual.instructions) {
      out.push_back(std::find(sel.begin(), sel.end(), ins.id) != sel.end() ? 1.0 : 0.0);
    }
    return out;
  }
};

class EmptyMatcher : public Matcher {
 public:
  std::vector<double> scores(const Dialogue&, int, const Manual& manual) override {
    return std::vector<double>(manual.instructions.size(), 0.0);
  }
};

std::vector<ArgSpan> gold_spans(const Turn& t, const std::string& instruction, int limit) {
  std::vector<ArgSpan> out;
  for (const auto& a : t.argument_annotations) {
    if (a.instruction == instruction && a.index <= limit) out.push_back({a.index, a.span});
  }
  return out;
}

int input_limit(const Database& db, const Instruction& ins, int max_args) {
  const auto* api = db.api(ins.api->api);
  if (!api) throw Error(Error::Kind::not_found, "unknown api '" + ins.api->api + "'");
  return std::min(static_cast<int>(api->inputs.size()), max_args);
}

class OracleTagger : public Tagger {
 public:
  OracleTagger(const Database& db, int max_args) : db_(db), max_args_(max_args) {}
  TagSequence tag(const Dialogue& dialogue, int turn, const Instruction& instruction) override {
    const int limit = input_limit(db_, instruction, max_args_);
    const auto& t = dialogue.turns.at(static_cast<std::size_t>(turn));
    return encode(gold_spans(t, instruction.id, limit), history_tokens(dialogue, turn), max_args_, limit);
  }

 private:
  const Database& db_;
  int max_args_;
};

class EmptyTagger : public Tagger {
 public:
  explicit EmptyTagger(int max_args) : max_args_(max_args) {}
  TagSequence tag(const Dialogue& dialogue, int turn, const Instruction&) override {
    TagSequence s;
    s.tokens = history_tokens(dialogue, turn);
    s.tags.assign(s.tokens.size(), Tag{});
    s.max_args = max_args_;
    return s;
  }

 private:
  int max_args_;
};

LabelSet labels(const Dialogue& d, const std::string& instruction, const std::vector<ArgSpan>& spans, int limit) {
  LabelSet out;
  for (const auto& a : spans) {
    if (a.index < 1 || a.index > limit) continue;
    out.insert(instruction + "|" + std::to_string(a.index) + "|" + text::normalize(span_text(d, a.span).value_or("")));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

void to_json(Json& j, const PredictorConfig& v) {
  j = Json{{"matcher", v.matcher},
           {"tagger", v.tagger},
           {"generator", v.generator},
           {"bridge_command", v.bridge_command},
           {"bridge_timeout_ms", v.bridge_timeout_ms},
           {"objective", v.objective == Objective::f1 ? "f1" : "recall"},
           {"max_args", v.max_args},
           {"fuzzy_threshold", v.fuzzy_threshold},
           {"train_hook", v.train_hook},
           {"pair",
            {{"epochs", v.pair.epochs},
             {"learning_rate", v.pair.learning_rate},
             {"l2", v.pair.l2},
             {"negatives", v.pair.negatives},
             {"hash_bits", v.pair.hash_bits},
             {"seed", v.pair.seed}}}};
  j["threshold"] = v.threshold ? Json(*v.threshold) : Json(nullptr);
}

void from_json(const Json& j, PredictorConfig& v) {
  if (!j.is_object()) throw Error(Error::Kind::config, "predictor config must be an object");
  auto oneof = [&](const char* key, std::string& out, std::initializer_list<const char*> allowed) {
    if (!j.contains(key)) return;
    out = j.at(key).get<std::string>();
    for (const char* a : allowed) {
      if (out == a) return;
    }
    throw Error(Error::Kind::config, std::string("unknown ") + key + " '" + out + "'");
  };
  oneof("matcher", v.matcher, {"pair", "lexical", "oracle", "empty", "bridge"});
  oneof("tagger", v.tagger, {"lexicon", "oracle", "empty", "bridge"});
  oneof("generator", v.generator, {"native", "oracle", "bridge", "none"});
  if (j.contains("bridge_command")) v.bridge_command = j.at("bridge_command").get<std::vector<std::string>>();
  v.bridge_timeout_ms = j.value("bridge_timeout_ms", v.bridge_timeout_ms);
  if (j.contains("objective")) {
    auto o = j.at("objective").get<std::string>();
    if (o == "f1") {
      v.objective = Objective::f1;
    } else if (o == "recall") {
      v.objective = Objective::recall;
    } else {
      throw Error(Error::Kind::config, "unknown objective '" + o + "'");
    }
  }
  if (j.contains("threshold") && !j.at("threshold").is_null()) v.threshold = j.at("threshold").get<double>();
  v.max_args = j.value("max_args", v.max_args);
  v.fuzzy_threshold = j.value("fuzzy_threshold", v.fuzzy_threshold);
  v.train_hook = j.value("train_hook", v.train_hook);
  v.workdir = j.value("workdir", v.workdir);
  v.jobs = j.value("jobs", v.jobs);
  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    v.pair.epochs = p.value("epochs", v.pair.epochs);
    v.pair.learning_rate = p.value("learning_rate", v.pair.learning_rate);
    v.pair.l2 = p.value("l2", v.pair.l2);
    v.pair.negatives = p.value("negatives", v.pair.negatives);
    v.pair.hash_bits = p.value("hash_bits", v.pair.hash_bits);
    v.pair.seed = p.value("seed", v.pair.seed);
  }
  if (v.max_args < 1) throw Error(Error::Kind::config, "max_args must be positive");
}

std::string config_hash(const PredictorConfig& config) { return hex_digest(Json(config).dump()); }

Experiment make_experiment(const Database& db, const std::vector<Manual>& manuals, const Corpus& corpus) {
  Experiment e;
  e.db = &db;
  for (const auto& m : manuals) e.manuals[m.id] = &m;
  e.train = corpus.train;
  e.dev = corpus.dev;
  e.test = corpus.test;
  if (corpus.manifest.contains("test_manuals")) {
    for (const auto& id : corpus.manifest["test_manuals"]) e.held_out.insert(id.get<std::string>());
  }
  for (const auto& d : corpus.test) e.held_out.insert(d.manual_id);
  if (corpus.manifest.contains("train_manuals")) {
    for (const auto& id : corpus.manifest["train_manuals"]) e.train_manuals.push_back(id.get<std::string>());
  } else {
    std::set<std::string> seen;
    for (const auto& d : corpus.train) {
      if (seen.insert(d.manual_id).second) e.train_manuals.push_back(d.manual_id);
    }
    std::sort(e.train_manuals.begin(), e.train_manuals.end());
  }
  return e;
}

void check_split(const std::vector<Dialogue>& training, const std::set<std::string>& held_out) {
  for (const auto& d : training) {
    if (held_out.count(d.manual_id)) {
      throw Error(Error::Kind::split_leakage,
                  "dialogue '" + d.id + "' uses held-out manual '" + d.manual_id + "'");
    }
  }
}

bool involves(const Dialogue& dialogue, const DomainName& domain) {
  const auto& ds = dialogue.goal.domains;
  return std::find(ds.begin(), ds.end(), domain) != ds.end();
}

std::set<DomainName> turn_domains(const Dialogue& dialogue, int turn, const Manual& manual) {
  std::set<DomainName> out;
  for (const auto& id : dialogue.turns.at(static_cast<std::size_t>(turn)).selected_instructions) {
    if (const auto* ins = manual.find(id)) out.insert(ins->domain);
  }
  return out;
}

Evaluator::Evaluator(const Experiment& experiment, PredictorConfig config)
    : exp_(experiment), config_(std::move(config)) {
  if (!exp_.db) throw Error(Error::Kind::config, "experiment has no database");
  const auto& db = *exp_.db;
  if (config_.matcher == "bridge" || config_.tagger == "bridge" || config_.generator == "bridge") {
    bridge_ = std::make_unique<BridgeClient>(BridgeOptions{config_.bridge_command, config_.bridge_timeout_ms});
  }
  if (config_.matcher == "pair") {
    matcher_ = std::make_unique<PairMatcher>(db, config_.pair);
  } else if (config_.matcher == "lexical") {
    matcher_ = std::make_unique<LexicalMatcher>(db);
  } else if (config_.matcher == "oracle") {
    matcher_ = std::make_unique<OracleMatcher>();
  } else if (config_.matcher == "empty") {
    matcher_ = std::make_unique<EmptyMatcher>();
  } else if (config_.matcher == "bridge") {
    matcher_ = std::make_unique<BridgeMatcher>(*bridge_);
  } else {
    throw Error(Error::Kind::config, "unknown matcher '" + config_.matcher + "'");
  }
  if (config_.tagger == "lexicon") {
    tagger_ = std::make_unique<LexiconTagger>(db, LexiconTaggerOptions{config_.fuzzy_threshold, config_.max_args, true});
  } else if (config_.tagger == "oracle") {
    tagger_ = std::make_unique<OracleTagger>(db, config_.max_args);
  } else if (config_.tagger == "empty") {
    tagger_ = std::make_unique<EmptyTagger>(config_.max_args);
  } else if (config_.tagger == "bridge") {
    tagger_ = std::make_unique<BridgeTagger>(*bridge_, config_.max_args);
  } else {
    throw Error(Error::Kind::config, "unknown tagger '" + config_.tagger + "'");
  }
  ablation_ = std::make_unique<LexiconTagger>(db, LexiconTaggerOptions{config_.fuzzy_threshold, config_.max_args, false});
}

Evaluator::~Evaluator() = default;

Tagger& Evaluator::tagger(bool use_manual) { return use_manual ? *tagger_ : *ablation_; }

const Manual& Evaluator::manual_of(const Dialogue& d) const {
  auto it = exp_.manuals.find(d.manual_id);
  if (it == exp_.manuals.end() || !it->second) {
    throw Error(Error::Kind::not_found, "dialogue '" + d.id + "': unknown manual '" + d.manual_id + "'");
  }
  return *it->second;
}

ScoredSet Evaluator::score(const std::vector<Dialogue>& dialogues) {
  ScoredSet out;
  for (const auto& d : dialogues) {
    const auto& manual = manual_of(d);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const int turn = static_cast<int>(t);
      ScoredTurn st;
      for (const auto& ins : manual.instructions) st.instructions.push_back(ins.id);
      st.scores = matcher_->scores(d, turn, manual);
      if (st.scores.size() != st.instructions.size()) {
        throw Error(Error::Kind::predictor, "matcher returned " + std::to_string(st.scores.size()) +
                                                " scores for " + std::to_string(st.instructions.size()) +
                                                " instructions");
      }
      st.gold.insert(d.turns[t].selected_instructions.begin(), d.turns[t].selected_instructions.end());
      out.keys.push_back({d.id, turn});
      out.turns.push_back(std::move(st));
      out.manuals.push_back(d.manual_id);
    }
  }
  return out;
}

const ScoredSet& Evaluator::cached(const std::string& split) {
  auto it = cache_.find(split);
  if (it != cache_.end()) return it->second;
  const auto& ds = split == "train" ? exp_.train : split == "dev" ? exp_.dev : exp_.test;
  return cache_.emplace(split, score(ds)).first->second;
}

bool Evaluator::fitted_matcher() const { return config_.matcher == "pair"; }

void Evaluator::fit(const std::vector<Dialogue>& training) {
  if (!fitted_matcher()) return;
  static_cast<PairMatcher&>(*matcher_).fit(training, exp_.manuals);
  cache_.clear();
}

double Evaluator::fit_threshold(const ScoredSet& scored) const {
  if (config_.threshold) return *config_.threshold;
  return pick_operating_point(scored.turns, config_.objective);
}

MatchingReport Evaluator::evaluate_matching(const ScoredSet& scored, double threshold) const {
  MatchingReport r;
  r.threshold = threshold;
  r.keys = scored.keys;
  std::vector<std::vector<bool>> pred_bits, gold_bits;
  for (const auto& st : scored.turns) {
    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t i = 0; i < st.instructions.size(); ++i) {
      if (st.scores[i] >= threshold) ranked.emplace_back(-st.scores[i], st.instructions[i]);
    }
    std::sort(ranked.begin(), ranked.end());
    if (ranked.size() > kMaxSelectedInstructions) ranked.resize(kMaxSelectedInstructions);
    LabelSet pred;
    for (const auto& [s, id] : ranked) pred.insert(id);
    std::vector<bool> pb, gb;
    for (const auto& id : st.instructions) {
      pb.push_back(pred.count(id) > 0);
      gb.push_back(st.gold.count(id) > 0);
    }
    pred_bits.push_back(std::move(pb));
    gold_bits.push_back(std::move(gb));
    r.predicted.push_back(std::move(pred));
    r.gold.push_back(st.gold);
  }
  r.prf = set_prf(r.predicted, r.gold);
  r.accuracy = instr_sentence_accuracy(pred_bits, gold_bits);
  return r;
}

TaggingReport Evaluator::evaluate_tagging(const std::vector<Dialogue>& dialogues, bool use_manual) {
  TaggingReport r;
  std::vector<std::vector<Tag>> pred_tags, gold_tags;
  auto& tg = tagger(use_manual);
  for (const auto& d : dialogues) {
    const auto& manual = manual_of(d);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const int turn = static_cast<int>(t);
      const auto& tr = d.turns[t];
      LabelSet pred, gold;
      bool any = false;
      std::vector<HistoryToken> tokens;
      for (const auto& id : tr.selected_instructions) {
        const auto* ins = manual.find(id);
        if (!ins || !ins->api) continue;
        if (!any) tokens = history_tokens(d, turn);
        any = true;
        const int limit = input_limit(*exp_.db, *ins, config_.max_args);
        auto spans = gold_spans(tr, id, limit);
        auto gseq = encode(spans, tokens, config_.max_args, limit);
        auto pseq = tg.tag(d, turn, *ins);
        if (pseq.tags.size() != gseq.tags.size()) {
          throw Error(Error::Kind::predictor, "tagger returned " + std::to_string(pseq.tags.size()) +
                                                  " tags for " + std::to_string(gseq.tags.size()) + " tokens");
        }
        gold.merge(labels(d, id, spans, limit));
        pred.merge(labels(d, id, decode(pseq), limit));
        gold_tags.push_back(std::move(gseq.tags));
        pred_tags.push_back(std::move(pseq.tags));
      }
      if (!any) continue;
      r.keys.push_back({d.id, turn});
      r.predicted.push_back(std::move(pred));
      r.gold.push_back(std::move(gold));
    }
  }
  r.sequences = gold_tags.size();
  r.token_accuracy = token_tag_accuracy(pred_tags, gold_tags);
  r.prf = set_prf(r.predicted, r.gold);
  return r;
}

GenerationReport Evaluator::evaluate_generation(const std::vector<Dialogue>& dialogues) {
  std::vector<std::string> candidates, references;
  std::vector<std::vector<std::string>> expected;
  for (const auto& d : dialogues) {
    const auto& manual = manual_of(d);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const auto& tr = d.turns[t];
      if (tr.selected_instructions.empty()) continue;
      const int turn = static_cast<int>(t);
      const auto seed = Rng::derive(fnv1a(d.id), "turn/" + std::to_string(t));
      std::string text;
      if (config_.generator == "oracle") {
        text = tr.agent_response;
      } else if (config_.generator == "bridge") {
        text = generate_response(bridge_.get(), d, turn, manual, seed);
      } else {
        std::vector<const Instruction*> selected;
        for (const auto& id : tr.selected_instructions) {
          if (const auto* ins = manual.find(id)) selected.push_back(ins);
        }
        try {
          text = realize(selected, tr.api_calls, tr.api_results, {}, seed).text;
        } catch (const Error&) {
          text.clear();
        }
      }
      candidates.push_back(std::move(text));
      references.push_back(tr.agent_response);
      std::vector<std::string> values;
      for (const auto& v : tr.response_values) values.push_back(v.value);
      expected.push_back(std::move(values));
    }
  }
  GenerationReport r;
  r.turns = candidates.size();
  r.bleu = bleu_score(candidates, references);
  r.aer = aer(candidates, expected, config_.fuzzy_threshold);
  return r;
}

std::optional<int> Evaluator::run_hook(const std::vector<Dialogue>& training, const std::string& workdir) const {
  if (config_.train_hook.empty()) return std::nullopt;
  namespace fs = std::filesystem;
  fs::path dir = workdir.empty() ? fs::temp_directory_path() / ("magdial-" + config_hash(config_)) : fs::path(workdir);
  fs::create_directories(dir);
  const auto file = (dir / "train.jsonl").string();
  save_corpus(file, training);
  setenv("MAGDIAL_TRAIN_FILE", file.c_str(), 1);
  setenv("MAGDIAL_WORKDIR", dir.string().c_str(), 1);
  const int status = std::system(config_.train_hook.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

SubtaskReport Evaluator::run(const std::vector<Dialogue>* training, const std::vector<Dialogue>* dev,
                             const std::string& workdir) {
  const auto& train = training ? *training : exp_.train;
  check_split(train, exp_.held_out);
  check_split(dev ? *dev : exp_.dev, exp_.held_out);
  SubtaskReport r;
  r.config_hash = config_hash(config_);
  r.train_dialogues = train.size();
  r.hook_status = run_hook(train, workdir.empty() ? config_.workdir : workdir);
  if (r.hook_status && *r.hook_status != 0) {
    throw Error(Error::Kind::config, "train hook exited with status " + std::to_string(*r.hook_status));
  }
  fit(train);
  const auto dev_scores = dev ? score(*dev) : cached("dev");
  r.threshold = fit_threshold(dev_scores);
  r.dev_matching = evaluate_matching(dev_scores, r.threshold);
  r.matching = evaluate_matching(cached("test"), r.threshold);
  for (bool m : {true, false}) {
    if (!tagging_cache_.count(m)) tagging_cache_[m] = evaluate_tagging(exp_.test, m);
  }
  r.tagging = tagging_cache_[true];
  r.tagging_without_manual = tagging_cache_[false];
  if (config_.generator != "none") r.generation = evaluate_generation(exp_.test);
  return r;
}

SubtaskReport run_subtask_eval(const Experiment& experiment, const PredictorConfig& config) {
  Evaluator ev(experiment, config);
  return ev.run();
}

namespace {

CurvePoint point_of(double x, const std::vector<Dialogue>& train, const SubtaskReport& r) {
  CurvePoint p;
  p.x = x;
  p.train_dialogues = train.size();
  std::set<std::string> ms;
  for (const auto& d : train) ms.insert(d.manual_id);
  p.train_manuals.assign(ms.begin(), ms.end());
  p.threshold = r.threshold;
  p.matching_f1 = r.matching.prf.macro.f1;
  p.tagging_f1 = r.tagging.prf.macro.f1;
  p.hook_status = r.hook_status;
  return p;
}

std::string point_dir(const PredictorConfig& config, const std::string& name) {
  if (config.train_hook.empty()) return {};
  namespace fs = std::filesystem;
  fs::path base = config.workdir.empty() ? fs::temp_directory_path() / ("magdial-" + config_hash(config))
                                         : fs::path(config.workdir);
  return (base / name).string();
}

std::string fraction_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", f);
  return buf;
}

struct Job {
  std::vector<Dialogue> train;
  std::optional<std::vector<Dialogue>> dev;
  std::string dir;
};

// Runs each job with its own evaluator, `config.jobs` at a time.
std::vector<SubtaskReport> run_jobs(const Experiment& experiment, const PredictorConfig& config,
                                    const std::vector<Job>& jobs) {
  std::vector<SubtaskReport> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  unsigned width = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
  width = std::min<unsigned>(width, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::unique_ptr<Evaluator> ev;
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        if (!ev) ev = std::make_unique<Evaluator>(experiment, config);
        const auto& j = jobs[i];
        out[i] = ev->run(&j.train, j.dev ? &*j.dev : nullptr, j.dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

std::vector<CurvePoint> sweep_data_size(const Experiment& experiment, const PredictorConfig& config,
                                        const std::vector<double>& fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(Error::Kind::argument, "fraction " + fraction_label(f) + " outside (0, 1]");
  }
  std::vector<std::size_t> order(experiment.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(Rng::derive(seed, "sweep/data"));
  rng.shuffle(order);
  std::vector<Job> jobs;
  for (double f : fractions) {
    auto n = static_cast<std::size_t>(std::llround(f * static_cast<double>(order.size())));
    n = std::clamp<std::size_t>(n, 1, order.size());
    Job j;
    for (std::size_t i = 0; i < n; ++i) j.train.push_back(experiment.train[order[i]]);
    j.dir = point_dir(config, "data-" + fraction_label(f));
    jobs.push_back(std::move(j));
  }
  auto reports = run_jobs(experiment, config, jobs);
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) out.push_back(point_of(fractions[i], jobs[i].train, reports[i]));
  return out;
}

std::vector<CurvePoint> sweep_manual_count(const Experiment& experiment, const PredictorConfig& config,
                                           const std::vector<std::size_t>& counts) {
  for (auto c : counts) {
    if (c < 1 || c > experiment.train_manuals.size()) {
      throw Error(Error::Kind::argument, "manual count " + std::to_string(c) + " outside [1, " +
                                             std::to_string(experiment.train_manuals.size()) + "]");
    }
  }
  std::vector<Job> jobs;
  std::vector<std::vector<std::string>> kept;
  for (auto c : counts) {
    std::set<std::string> keep(experiment.train_manuals.begin(),
                               experiment.train_manuals.begin() + static_cast<std::ptrdiff_t>(c));
    Job j;
    for (const auto& d : experiment.train) {
      if (keep.count(d.manual_id)) j.train.push_back(d);
    }
    if (j.train.empty()) throw Error(Error::Kind::argument, "no training dialogues for " + std::to_string(c) + " manuals");
    j.dir = point_dir(config, "manuals-" + std::to_string(c));
    jobs.push_back(std::move(j));
    kept.emplace_back(keep.begin(), keep.end());
  }
  auto reports = run_jobs(experiment, config, jobs);
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto p = point_of(static_cast<double>(counts[i]), jobs[i].train, reports[i]);
    p.train_manuals = kept[i];
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<LodoRow> leave_one_domain_out(const Experiment& experiment, const PredictorConfig& config,
                                          const std::vector<std::string>& excluded) {
  std::map<std::string, const Dialogue*> by_id;
  for (const auto& d : experiment.test) by_id[d.id] = &d;
  auto domains_of = [&](const TurnKey& k) {
    const auto* d = by_id.at(k.dialogue);
    return turn_domains(*d, k.turn, *experiment.manuals.at(d->manual_id));
  };
  std::vector<Job> jobs;
  for (const auto& ex : excluded) {
    Job j;
    std::vector<Dialogue> dev;
    for (const auto& d : experiment.train) {
      if (ex == "Full" || !involves(d, ex)) j.train.push_back(d);
    }
    for (const auto& d : experiment.dev) {
      if (ex == "Full" || !involves(d, ex)) dev.push_back(d);
    }
    if (j.train.empty() || dev.empty()) {
      throw Error(Error::Kind::argument, "no training or dev dialogues without domain '" + ex + "'");
    }
    j.dev = std::move(dev);
    j.dir = point_dir(config, "lodo-" + ex);
    jobs.push_back(std::move(j));
  }
  auto reports = run_jobs(experiment, config, jobs);
  std::vector<LodoRow> out;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& r = reports[k];
    LodoRow row;
    row.excluded = excluded[k];
    row.train_dialogues = jobs[k].train.size();
    std::map<DomainName, std::vector<double>> m, t;
    for (std::size_t i = 0; i < r.matching.keys.size(); ++i) {
      for (const auto& dom : domains_of(r.matching.keys[i])) m[dom].push_back(r.matching.prf.turns[i].f1);
    }
    for (std::size_t i = 0; i < r.tagging.keys.size(); ++i) {
      for (const auto& dom : domains_of(r.tagging.keys[i])) t[dom].push_back(r.tagging.prf.turns[i].f1);
    }
    for (const auto& [dom, v] : m) row.matching_f1[dom] = mean(v);
    for (const auto& [dom, v] : t) row.tagging_f1[dom] = mean(v);
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

Json turn_dump(const std::vector<TurnKey>& keys, const PRFReport& prf, const std::vector<LabelSet>& predicted,
               const std::vector<LabelSet>& gold) {
  Json out = Json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out.push_back({{"dialogue", keys[i].dialogue},
                   {"turn", keys[i].turn},
                   {"predicted", predicted[i]},
                   {"gold", gold[i]},
                   {"prf", prf.turns[i]}});
  }
  return out;
}

}  // namespace

void to_json(Json& j, const MatchingReport& v) {
  j = Json{{"threshold", v.threshold},
           {"accuracy", v.accuracy},
           {"macro", v.prf.macro},
           {"conventions", {{"average", "macro over turns"}, {"empty_empty", 1.0}}},
           {"turns", turn_dump(v.keys, v.prf, v.predicted, v.gold)}};
}

void to_json(Json& j, const TaggingReport& v) {
  j = Json{{"token_accuracy", v.token_accuracy},
           {"sequences", v.sequences},
           {"macro", v.prf.macro},
           {"conventions",
            {{"average", "macro over turns with a selected api instruction"}, {"empty_empty", 1.0}}},
           {"turns", turn_dump(v.keys, v.prf, v.predicted, v.gold)}};
}

void to_json(Json& j, const GenerationReport& v) {
  j = Json{{"bleu", v.bleu}, {"aer", v.aer}, {"turns", v.turns}};
}

void to_json(Json& j, const SubtaskReport& v) {
  j = Json{{"config_hash", v.config_hash},
           {"train_dialogues", v.train_dialogues},
           {"threshold", v.threshold},
           {"dev_matching", v.dev_matching},
           {"matching", v.matching},
           {"tagging", v.tagging},
           {"tagging_without_manual", v.tagging_without_manual}};
  j["generation"] = v.generation ? Json(*v.generation) : Json(nullptr);
  j["hook_status"] = v.hook_status ? Json(*v.hook_status) : Json(nullptr);
}

void to_json(Json& j, const CurvePoint& v) {
  j = Json{{"x", v.x},
           {"train_dialogues", v.train_dialogues},
           {"train_manuals", v.train_manuals},
           {"threshold", v.threshold},
           {"matching_f1", v.matching_f1},
           {"tagging_f1", v.tagging_f1}};
  j["hook_status"] = v.hook_status ? Json(*v.hook_status) : Json(nullptr);
}

void to_json(Json& j, const LodoRow& v) {
  j = Json{{"excluded", v.excluded},
           {"train_dialogues", v.train_dialogues},
           {"matching_f1", v.matching_f1},
           {"tagging_f1", v.tagging_f1}};
}

}  // namespace magdial
