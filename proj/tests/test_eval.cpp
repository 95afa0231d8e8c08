#include <filesystem>

#include "common.hpp"
#include "doctest.h"
#include "magdial/error.hpp"

using namespace magdial;

namespace {

const Experiment& experiment() {
  static const Experiment e = make_experiment(testing::world().db, testing::world().manuals, testing::small_corpus());
  return e;
}

PredictorConfig quick(std::string matcher, std::string tagger) {
  PredictorConfig c;
  c.matcher = std::move(matcher);
  c.tagger = std::move(tagger);
  c.generator = "none";
  c.jobs = 1;
  return c;
}

std::string corpus_files() {
  static const std::string dir = [] {
    auto d = (std::filesystem::temp_directory_path() / "magdial-test-bridge").string();
    save_corpus_dir(d, testing::small_corpus());
    return d;
  }();
  return dir;
}

PredictorConfig bridged(const std::string& mode) {
  auto c = quick("bridge", "bridge");
  c.generator = "bridge";
  c.bridge_timeout_ms = 1000;
  const auto dir = corpus_files();
  c.bridge_command = {MAGDIAL_ECHO_PREDICTOR, "--corpus", dir + "/train.jsonl", "--corpus", dir + "/dev.jsonl",
                      "--corpus", dir + "/test.jsonl", "--mode", mode, "--slow-ms", "3000"};
  return c;
}

}  // namespace

TEST_CASE("oracle predictors score 1.0") {
  auto r = run_subtask_eval(experiment(), quick("oracle", "oracle"));
  CHECK(r.matching.accuracy == 1.0);
  CHECK(r.matching.prf.macro == PRF{1.0, 1.0, 1.0});
  CHECK(r.tagging.prf.macro == PRF{1.0, 1.0, 1.0});
  CHECK(r.tagging.token_accuracy == 1.0);
}

TEST_CASE("empty predictors score only the empty turns") {
  auto r = run_subtask_eval(experiment(), quick("empty", "empty"));
  std::size_t empty = 0;
  for (const auto& g : r.matching.gold) empty += g.empty();
  const double share = static_cast<double>(empty) / static_cast<double>(r.matching.gold.size());
  CHECK(r.matching.prf.macro.recall == doctest::Approx(share));
  CHECK(r.tagging.prf.macro.f1 == 0.0);
}

TEST_CASE("recall objective does not lower dev recall") {
  auto f1 = quick("pair", "lexicon");
  auto rec = f1;
  rec.objective = Objective::recall;
  auto a = run_subtask_eval(experiment(), f1);
  auto b = run_subtask_eval(experiment(), rec);
  CHECK(b.dev_matching.prf.macro.recall >= a.dev_matching.prf.macro.recall);
  CHECK(b.threshold <= a.threshold);
}

TEST_CASE("training on a held-out manual aborts") {
  auto e = experiment();
  e.train.push_back(e.test.front());
  Evaluator ev(e, quick("pair", "lexicon"));
  CHECK_THROWS_AS(ev.run(), Error);
  try {
    ev.run();
  } catch (const Error& x) {
    CHECK(x.kind() == Error::Kind::split_leakage);
  }
  auto dev = e.dev;
  dev.push_back(e.test.front());
  Evaluator ev2(experiment(), quick("pair", "lexicon"));
  CHECK_THROWS_AS(ev2.run(nullptr, &dev), Error);
}

TEST_CASE("sweeps validate their arguments") {
  CHECK_THROWS_AS(sweep_data_size(experiment(), quick("oracle", "oracle"), {0.0}, 1), Error);
  CHECK_THROWS_AS(sweep_data_size(experiment(), quick("oracle", "oracle"), {1.5}, 1), Error);
  CHECK_THROWS_AS(sweep_manual_count(experiment(), quick("oracle", "oracle"), {0}), Error);
  auto pts = sweep_data_size(experiment(), quick("oracle", "oracle"), {0.5, 1.0}, 1);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].train_dialogues == 30);
  CHECK(pts[1].train_dialogues == 60);
  auto m = sweep_manual_count(experiment(), quick("oracle", "oracle"), {2});
  CHECK(m[0].train_manuals.size() == 2);
}

TEST_CASE("leave one domain out drops the domain from training") {
  auto rows = leave_one_domain_out(experiment(), quick("oracle", "oracle"), {"Full", "taxi"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].train_dialogues < rows[0].train_dialogues);
  for (const auto& [domain, f1] : rows[1].matching_f1) CHECK(f1 == 1.0);
}

TEST_CASE("config hash tracks the predictor config") {
  auto a = quick("pair", "lexicon");
  auto b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.pair.epochs = 9;
  CHECK(config_hash(a) != config_hash(b));
  Json j = a;
  CHECK(config_hash(j.get<PredictorConfig>()) == config_hash(a));
  CHECK_THROWS_AS(Json({{"matcher", "nope"}}).get<PredictorConfig>(), Error);
}

TEST_CASE("training hook exit status is recorded") {
  auto c = quick("oracle", "oracle");
  c.train_hook = "test -s \"$MAGDIAL_TRAIN_FILE\" && test -d \"$MAGDIAL_WORKDIR\"";
  c.workdir = (std::filesystem::temp_directory_path() / "magdial-test-hook").string();
  auto r = run_subtask_eval(experiment(), c);
  REQUIRE(r.hook_status);
  CHECK(*r.hook_status == 0);
  c.train_hook = "exit 3";
  CHECK_THROWS_AS(run_subtask_eval(experiment(), c), Error);
}

TEST_CASE("echo bridge reproduces gold") {
  auto r = run_subtask_eval(experiment(), bridged("gold"));
  CHECK(r.matching.prf.macro == PRF{1.0, 1.0, 1.0});
  CHECK(r.tagging.prf.macro == PRF{1.0, 1.0, 1.0});
  REQUIRE(r.generation);
  CHECK(r.generation->bleu == doctest::Approx(1.0));
  CHECK(r.generation->aer.rate == 0.0);
}

TEST_CASE("bridge protocol failures surface as predictor errors") {
  for (const char* mode : {"unknown-id", "bad-version", "garbage", "slow"}) {
    CAPTURE(mode);
    try {
      run_subtask_eval(experiment(), bridged(mode));
      FAIL("expected a predictor error");
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::predictor);
    }
  }
  auto missing = bridged("gold");
  missing.bridge_command = {"/nonexistent/predictor"};
  CHECK_THROWS_AS(run_subtask_eval(experiment(), missing), Error);
}

TEST_CASE("abstaining bridge scores like the empty predictor") {
  auto r = run_subtask_eval(experiment(), bridged("abstain"));
  auto e = run_subtask_eval(experiment(), quick("empty", "empty"));
  CHECK(r.matching.prf.macro == e.matching.prf.macro);
  CHECK(r.tagging.prf.macro == e.tagging.prf.macro);
}
