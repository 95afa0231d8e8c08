// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "magdial/api_engine.hpp"
#include "magdial/error.hpp"
#include "magdial/eval.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/metrics.hpp"
#include "magdial/rng.hpp"
#include "magdial/service.hpp"
#include "magdial/setup.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

namespace {

// Pinned tolerances and budgets.
constexpr std::size_t kClosedLoopGoals = 200;
constexpr double kClosedLoopSeconds = 60.0;
constexpr std::size_t kCarryoverSequences = 1000;
constexpr std::size_t kCarryoverEntities = 20;
constexpr std::size_t kCodecCases = 10000;
constexpr double kBleuTolerance = 1e-9;
constexpr double kPrfTolerance = 1e-12;
constexpr double kGateSeconds = 5.0;
constexpr double kTaggingGap = 0.10;
constexpr double kSweepSlack = 0.02;
constexpr double kCorpusSeconds = 120.0;
constexpr std::size_t kCorpusDialogues = 1100;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

struct Context {
  std::string fixtures;
  World world;
  std::vector<Dialogue> closed_loop;
  std::optional<Corpus> corpus;
  double corpus_seconds = 0.0;
  unsigned jobs = 0;
};

const Corpus& default_corpus(Context& ctx) {
  if (!ctx.corpus) {
    auto t0 = Clock::now();
    ctx.corpus = generate_corpus(ctx.world.db, ctx.world.manuals, CorpusConfig{});
    ctx.corpus_seconds = seconds_since(t0);
  }
  return *ctx.corpus;
}

std::vector<CallRecord> log_of(const Dialogue& d) {
  std::vector<CallRecord> log;
  for (const auto& t : d.turns) {
    for (std::size_t i = 0; i < t.api_calls.size() && i < t.api_results.size(); ++i) {
      log.push_back({t.index, t.api_calls[i], t.api_results[i]});
    }
  }
  return log;
}

Outcome closed_loop(Context& ctx) {
  auto t0 = Clock::now();
  const auto& w = ctx.world;
  auto goals = sample_goals(w.db, 2024, kClosedLoopGoals);
  std::size_t completed = 0, valid = 0, capped = 0;
  ctx.closed_loop.clear();
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto& manual = w.manuals[i % w.manuals.size()];
    auto r = self_play(goals[i], manual, w.db, Rng::derive(2024, "dialogue/" + goals[i].id));
    completed += r.completed;
    capped += r.dialogue.turns.size() > 20;
    valid += validate(r.dialogue, w.db, &manual).empty();
    ctx.closed_loop.push_back(std::move(r.dialogue));
  }
  Experiment e;
  e.db = &w.db;
  for (const auto& m : w.manuals) e.manuals[m.id] = &m;
  e.dev = ctx.closed_loop;
  e.test = ctx.closed_loop;
  PredictorConfig cfg;
  cfg.matcher = "oracle";
  cfg.tagger = "oracle";
  cfg.generator = "none";
  cfg.threshold = 0.5;
  auto rep = Evaluator(e, cfg).run();
  const double secs = seconds_since(t0);
  const bool scores = rep.matching.accuracy == 1.0 && rep.matching.prf.macro.f1 == 1.0 &&
                      rep.tagging.token_accuracy == 1.0 && rep.tagging.prf.macro.f1 == 1.0;
  return {completed == goals.size() && valid == goals.size() && capped == 0 && scores && secs < kClosedLoopSeconds,
          std::to_string(completed) + "/" + std::to_string(goals.size()) + " completed, " + std::to_string(valid) +
              " valid, match acc " + fmt(rep.matching.accuracy) + " F1 " + fmt(rep.matching.prf.macro.f1) +
              ", tag acc " + fmt(rep.tagging.token_accuracy) + " F1 " + fmt(rep.tagging.prf.macro.f1) + ", " +
              fmt(secs, 1) + "s"};
}

Database toy_table(std::uint64_t seed) {
  Database db;
  db.registry = {"name", "area", "price", "stars"};
  db.domains.push_back({"hotel", false, {"name", "area", "price", "stars"}});
  db.apis.push_back({"hotel_find", "hotel", Operation::find, {{"area", false}, {"price", false}, {"stars", false}},
                     {"name", "area", "price", "stars"}});
  Rng rng(seed);
  const std::vector<std::string> areas{"north", "south", "east", "west"};
  const std::vector<std::string> prices{"cheap", "moderate", "expensive"};
  const std::vector<std::string> stars{"2", "3", "4"};
  for (std::size_t i = 0; i < kCarryoverEntities; ++i) {
    db.entities["hotel"].push_back(
        {"hotel",
         {{"name", "hotel " + std::to_string(i)}, {"area", rng.pick(areas)}, {"price", rng.pick(prices)}, {"stars", rng.pick(stars)}}});
  }
  return db;
}

Outcome carryover(Context&) {
  const auto db = toy_table(5);
  const std::vector<std::pair<std::string, std::vector<std::string>>> values{
      {"area", {"north", "south", "east", "west"}}, {"price", {"cheap", "moderate", "expensive"}}, {"stars", {"2", "3", "4"}}};
  Rng rng(99);
  EngineOptions all{kCarryoverEntities};
  std::size_t agree = 0;
  for (std::size_t trial = 0; trial < kCarryoverSequences; ++trial) {
    SessionDbState state;
    std::map<std::string, std::string> merged;
    ApiResult last;
    const std::size_t calls = 1 + rng.below(5);
    for (std::size_t c = 0; c < calls; ++c) {
      ApiCall call{"hotel_find", std::nullopt, {}};
      for (const auto& [attr, vs] : values) {
        if (rng.chance(0.4)) {
          call.args.push_back({attr, rng.pick(vs), std::nullopt});
          merged[attr] = call.args.back().value;
        }
      }
      last = execute(call, db, state, all);
    }
    ApiCall single{"hotel_find", std::nullopt, {}};
    for (const auto& [attr, _] : values) {
      if (merged.count(attr)) single.args.push_back({attr, merged[attr], std::nullopt});
    }
    SessionDbState fresh;
    auto one = execute(single, db, fresh, all);
    std::vector<Entity> brute;
    for (const auto& e : db.entities_of("hotel")) {
      bool ok = true;
      for (const auto& [k, v] : merged) ok = ok && *e.get(k) == v;
      if (ok) brute.push_back(e);
    }
    agree += last.entities == one.entities && last.count == one.count && one.entities == brute;
  }
  return {agree == kCarryoverSequences,
          std::to_string(agree) + "/" + std::to_string(kCarryoverSequences) + " sequences equal merged call and brute force"};
}

Outcome codec(Context& ctx) {
  const auto& corpus = default_corpus(ctx);
  Rng rng(31);
  std::size_t identical = 0, alphabet_ok = 0;
  for (int n = 1; n <= 3; ++n) alphabet_ok += tag_alphabet(n).size() == static_cast<std::size_t>(1 + 2 * n);
  for (std::size_t trial = 0; trial < kCodecCases; ++trial) {
    const auto& d = corpus.train[rng.below(corpus.train.size())];
    const int turn = static_cast<int>(rng.below(d.turns.size()));
    const auto toks = history_tokens(d, turn);
    const int max_args = 1 + static_cast<int>(rng.below(3));
    std::vector<ArgSpan> spans;
    std::vector<int> indexes;
    for (int k = 1; k <= max_args; ++k) indexes.push_back(k);
    rng.shuffle(indexes);
    std::size_t at = rng.below(toks.size());
    for (int k : indexes) {
      if (at >= toks.size() || !rng.chance(0.8)) break;
      std::size_t end = at;
      const std::size_t len = rng.below(4);
      while (end + 1 < toks.size() && end - at < len && toks[end + 1].turn == toks[at].turn &&
             toks[end + 1].speaker == toks[at].speaker) {
        ++end;
      }
      spans.push_back({k, Span{toks[at].turn, toks[at].speaker, toks[at].begin, toks[end].end}});
      at = end + 1 + rng.below(6);
    }
    auto seq = encode(spans, toks, max_args);
    auto back = decode(seq);
    auto key = [](const ArgSpan& a) { return std::make_tuple(a.span.turn, a.span.speaker, a.span.begin); };
    std::sort(spans.begin(), spans.end(), [&](const ArgSpan& a, const ArgSpan& b) { return key(a) < key(b); });
    identical += well_formed(seq) && back == spans;
  }
  return {identical == kCodecCases && alphabet_ok == 3,
          std::to_string(identical) + "/" + std::to_string(kCodecCases) + " round trips, alphabet sizes 3/5/7 " +
              (alphabet_ok == 3 ? "ok" : "wrong")};
}

Outcome fuzzy(Context& ctx) {
  const auto& corpus = default_corpus(ctx);
  std::vector<const Dialogue*> all;
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& d : *split) all.push_back(&d);
  }
  for (const auto& d : ctx.closed_loop) all.push_back(&d);
  std::size_t total = 0, exact = 0, unmatched = 0;
  for (const auto* d : all) {
    auto rep = fuzzy_annotate(*d, log_of(*d), ctx.world.db);
    unmatched += rep.unmatched.size();
    std::vector<ArgumentAnnotation> gold;
    for (const auto& t : d->turns) gold.insert(gold.end(), t.argument_annotations.begin(), t.argument_annotations.end());
    total += gold.size();
    if (gold.size() != rep.annotations.size()) continue;
    for (std::size_t i = 0; i < gold.size(); ++i) exact += gold[i] == rep.annotations[i].annotation;
  }
  return {total > 0 && exact == total && unmatched == 0,
          std::to_string(exact) + "/" + std::to_string(total) + " logged arguments with exact spans, " +
              std::to_string(unmatched) + " unmatched, " + std::to_string(all.size()) + " dialogues"};
}

Outcome metrics(Context& ctx) {
  std::vector<std::string> problems;
  auto bleu_fx = parse_json(read_file(ctx.fixtures + "/bleu_fixture.json"));
  const double b = bleu_score(bleu_fx["candidates"].get<std::vector<std::string>>(),
                              bleu_fx["references"].get<std::vector<std::string>>());
  const double bleu_err = std::abs(b - bleu_fx["corpus_bleu"].get<double>());
  if (bleu_err > kBleuTolerance) problems.push_back("bleu off by " + fmt(bleu_err, 12));

  auto prf_fx = parse_json(read_file(ctx.fixtures + "/prf_fixture.json"));
  std::vector<LabelSet> pred, gold;
  for (const auto& p : prf_fx["predicted"]) pred.push_back(p.get<LabelSet>());
  for (const auto& g : prf_fx["gold"]) gold.push_back(g.get<LabelSet>());
  auto prf = set_prf(pred, gold).macro;
  const double prf_err = std::max({std::abs(prf.precision - prf_fx["precision"].get<double>()),
                                   std::abs(prf.recall - prf_fx["recall"].get<double>()),
                                   std::abs(prf.f1 - prf_fx["f1"].get<double>())});
  if (pred.size() != 50 || prf_err > kPrfTolerance) problems.push_back("set-PRF off by " + fmt(prf_err, 15));

  const double a0 = aer({"the address is 12 main street"}, {{"12 main street"}}).rate;
  const double a1 = aer({"sorry, there is nothing"}, {{"12 main street"}}).rate;
  const double ah = aer({"it is in the north"}, {{"north", "01223 356354"}}).rate;
  if (a0 != 0.0 || a1 != 1.0 || ah != 0.5) problems.push_back("aer " + fmt(a0) + "/" + fmt(a1) + "/" + fmt(ah));

  const auto& corpus = default_corpus(ctx);
  auto e = make_experiment(ctx.world.db, ctx.world.manuals, corpus);
  PredictorConfig cfg;
  cfg.matcher = "oracle";
  cfg.tagger = "oracle";
  cfg.generator = "oracle";
  cfg.threshold = 0.5;
  auto rep = Evaluator(e, cfg).run();
  const bool gold_ok = rep.matching.accuracy == 1.0 && rep.matching.prf.macro == PRF{1.0, 1.0, 1.0} &&
                       rep.tagging.token_accuracy == 1.0 && rep.tagging.prf.macro == PRF{1.0, 1.0, 1.0} &&
                       rep.generation && rep.generation->bleu == 1.0 && rep.generation->aer.rate == 0.0;
  if (!gold_ok) problems.push_back("gold-vs-gold below 1.0");
  return {problems.empty(), problems.empty() ? "bleu err " + fmt(bleu_err, 12) + ", set-PRF err " + fmt(prf_err, 15) +
                                                   ", AER 0/1/0.5, gold-vs-gold 1.0"
                                             : problems.front()};
}

Outcome gate(Context& ctx) {
  auto identical = paraphrase_gate(std::vector<std::string>(14, "please tell the user the phone number of the hotel"));
  auto disjoint = paraphrase_gate({"alpha beta gamma delta", "one two three four"});
  const auto seeds = seed_library(ctx.world.db);
  std::vector<std::vector<std::string>> families;
  for (const auto& seed : seeds) families.push_back(variant_texts(seed, ctx.world.db));
  auto t0 = Clock::now();
  std::vector<GateReport> first;
  for (const auto& variants : families) first.push_back(paraphrase_gate(variants));
  const double secs = seconds_since(t0);
  Rng rng(8);
  std::size_t invariant = 0, accepted = 0;
  for (std::size_t i = 0; i < families.size(); ++i) {
    auto shuffled = families[i];
    rng.shuffle(shuffled);
    auto b = paraphrase_gate(shuffled);
    invariant += first[i].accepted == b.accepted && first[i].self_bleu == b.self_bleu;
    accepted += first[i].accepted;
  }
  const bool ok = identical.self_bleu == 1.0 && !identical.accepted && disjoint.accepted &&
                  invariant == seeds.size() && secs < kGateSeconds;
  return {ok, "identical " + fmt(identical.self_bleu) + " rejected, disjoint " + fmt(disjoint.self_bleu) +
                  " accepted, " + std::to_string(invariant) + "/" + std::to_string(seeds.size()) +
                  " families order-invariant (" + std::to_string(accepted) + " accepted), manual gated in " + fmt(secs, 2) + "s"};
}

Outcome patterns(Context& ctx) {
  const auto& corpus = default_corpus(ctx);
  auto e = make_experiment(ctx.world.db, ctx.world.manuals, corpus);
  PredictorConfig f1;
  f1.generator = "none";
  f1.jobs = ctx.jobs;
  f1.workdir = (std::filesystem::temp_directory_path() / "magdial-acceptance").string();
  auto rec = f1;
  rec.objective = Objective::recall;
  auto rf = run_subtask_eval(e, f1);
  auto rr = run_subtask_eval(e, rec);
  const double gap = rf.tagging.prf.macro.f1 - rf.tagging_without_manual.prf.macro.f1;
  const bool a = gap >= kTaggingGap;
  const bool b = rr.dev_matching.prf.macro.recall >= rf.dev_matching.prf.macro.recall;

  auto curve = sweep_data_size(e, f1, {0.2, 0.4, 0.6, 0.8, 1.0}, 7);
  bool c = curve.size() == 5;
  std::string trend;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    trend += (i ? "," : "") + fmt(curve[i].matching_f1, 3);
    if (i > 0 && curve[i].matching_f1 < curve[i - 1].matching_f1 - kSweepSlack) c = false;
  }

  bool d = false;
  auto leaky = e;
  leaky.train.push_back(e.test.front());
  try {
    Evaluator(leaky, f1).run();
  } catch (const Error& x) {
    d = x.kind() == Error::Kind::split_leakage;
  }
  bool d_sweep = false;
  try {
    sweep_data_size(leaky, f1, {1.0}, 7);
  } catch (const Error& x) {
    d_sweep = x.kind() == Error::Kind::split_leakage;
  }
  d = d && d_sweep;

  return {a && b && c && d,
          std::string("(a) tagging F1 ") + fmt(rf.tagging.prf.macro.f1) + " vs " +
              fmt(rf.tagging_without_manual.prf.macro.f1) + (a ? " ok" : " FAIL") + "; (b) dev recall " +
              fmt(rr.dev_matching.prf.macro.recall) + " >= " + fmt(rf.dev_matching.prf.macro.recall) +
              (b ? " ok" : " FAIL") + "; (c) matching F1 " + trend + (c ? " ok" : " FAIL") + "; (d) leakage " +
              (d ? "aborts" : "NOT caught")};
}

Outcome corpus_stats_bands(Context& ctx) {
  const auto& corpus = default_corpus(ctx);
  std::vector<Dialogue> all = corpus.train;
  all.insert(all.end(), corpus.dev.begin(), corpus.dev.end());
  all.insert(all.end(), corpus.test.begin(), corpus.test.end());
  auto s = corpus_stats(all);
  const bool ok = s.dialogues == kCorpusDialogues && s.turns_per_dialogue >= 4.0 && s.turns_per_dialogue <= 8.0 &&
                  s.instructions_per_turn >= 1.0 && s.instructions_per_turn <= 2.0 && s.args_per_turn >= 0.8 &&
                  s.args_per_turn <= 1.6 && s.no_instruction_share >= 0.10 && s.no_instruction_share <= 0.30 &&
                  ctx.corpus_seconds < kCorpusSeconds;
  return {ok, std::to_string(s.dialogues) + " dialogues, turns/dialogue " + fmt(s.turns_per_dialogue, 2) +
                  ", instructions/turn " + fmt(s.instructions_per_turn, 2) + ", args/turn " +
                  fmt(s.args_per_turn, 2) + ", no-instruction " + fmt(100 * s.no_instruction_share, 1) + "%, " +
                  fmt(ctx.corpus_seconds, 1) + "s"};
}

Outcome service_replay(Context& ctx) {
  auto goals = sample_goals(ctx.world.db, 7, 200);
  auto script_a = parse_json(read_file(ctx.fixtures + "/service_script.json"));
  auto script_b = parse_json(read_file(ctx.fixtures + "/service_script_b.json"));
  const auto frozen = read_file(ctx.fixtures + "/service_export.jsonl");
  const auto sock = (std::filesystem::temp_directory_path() / "magdial-acceptance.sock").string();

  auto with_server = [&](std::uint64_t token_seed, const std::function<void(const std::string&)>& body) {
    ServiceOptions o;
    o.token_seed = token_seed;
    Service svc(ctx.world.db, ctx.world.manuals, goals, o);
    HttpServer server(svc);
    std::thread t([&] { server.listen(sock); });
    server.wait_until_ready();
    try {
      body(sock);
    } catch (...) {
      server.stop();
      t.join();
      throw;
    }
    server.stop();
    t.join();
  };
  std::string solo_a, solo_b, mixed;
  with_server(1, [&](const std::string& addr) {
    ScriptClient(addr, script_a).run();
    solo_a = http_request(addr, "GET", "/v1/corpus").body;
  });
  with_server(2, [&](const std::string& addr) {
    ScriptClient(addr, script_b).run();
    solo_b = http_request(addr, "GET", "/v1/corpus").body;
  });
  with_server(3, [&](const std::string& addr) {
    ScriptClient a(addr, script_a), b(addr, script_b);
    bool more_a = true, more_b = true;
    while (more_a || more_b) {
      if (more_a) more_a = a.step();
      if (more_b) more_b = b.step();
    }
    mixed = http_request(addr, "GET", "/v1/corpus").body;
  });
  std::filesystem::remove(sock);
  const bool exact = solo_a == frozen;
  const bool interleaved = mixed == solo_a + solo_b;
  return {exact && interleaved, std::string("6-turn export ") + (exact ? "byte-exact" : "DIFFERS") + " (" +
                                    std::to_string(frozen.size()) + " bytes), interleaved exports " +
                                    (interleaved ? "unchanged" : "CHANGED")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  Context ctx;
  ctx.fixtures = MAGDIAL_FIXTURES;
  std::vector<std::string> only;
  app.add_option("--fixtures", ctx.fixtures, "Fixture directory");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--jobs", ctx.jobs, "Concurrent sweep jobs");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"oracle-closed-loop", closed_loop},   {"carryover-equivalence", carryover},
      {"bio-codec", codec},                  {"fuzzy-soundness", fuzzy},
      {"metrics-oracles", metrics},          {"paraphrase-gate", gate},
      {"result-patterns", patterns},          {"corpus-stats", corpus_stats_bands},
      {"service-replay", service_replay},
  };
  ctx.world = build_world(WorldConfig{});
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = fn(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed;
}
