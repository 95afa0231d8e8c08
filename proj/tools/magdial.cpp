// Command-line entry point: world generation, corpus simulation, evaluation
// and the collection service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "magdial/error.hpp"
#include "magdial/eval.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/service.hpp"
#include "magdial/setup.hpp"
#include "magdial/validate.hpp"

using namespace magdial;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  unsigned jobs = 0;
};

Config config_of(const Globals& g) {
  Config c = g.config.empty() ? Config{} : load_config(g.config);
  if (g.jobs) c.eval.jobs = g.jobs;
  return c;
}

void emit(const Globals& g, const Json& value) {
  const auto text = value.dump(1) + "\n";
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_file(g.out, text);
  }
}

Experiment experiment_of(const World& w, const std::string& dir, Corpus& corpus) {
  corpus = load_corpus_dir(dir);
  return make_experiment(w.db, w.manuals, corpus);
}

HttpServer* active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

std::vector<double> parse_fractions(const std::string& list) {
  std::vector<double> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manual-guided dialogue toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed of the subcommand's generator");
  app.add_option("--config", g.config, "Configuration document (JSON)");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--jobs", g.jobs, "Concurrent evaluation jobs");

  auto* gen_db = app.add_subcommand("gen-db", "Write the synthetic database");
  auto* gen_manuals = app.add_subcommand("gen-manuals", "Write the compiled manuals into --out");

  auto* gen_goals = app.add_subcommand("gen-goals", "Sample user goals");
  std::size_t goal_count = 10;
  gen_goals->add_option("--count", goal_count, "Number of goals");

  auto* gen_corpus = app.add_subcommand("gen-corpus", "Simulate a corpus into --out");

  auto* paraphrases = app.add_subcommand("check-paraphrases", "Self-BLEU gate over instruction variants");
  std::string variants_file;
  double gate_threshold = 0.8;
  paraphrases->add_option("--variants", variants_file, "JSON array of variant texts; default checks the seed library");
  paraphrases->add_option("--threshold", gate_threshold, "Acceptance threshold");

  std::string corpus_dir;
  auto* eval = app.add_subcommand("eval", "Subtask evaluation on a corpus");
  eval->add_option("--corpus", corpus_dir, "Corpus directory")->required();

  auto* sweep_data = app.add_subcommand("sweep-data", "Matching and tagging F1 against train size");
  std::string fractions = "0.1,0.25,0.5,0.75,1.0";
  sweep_data->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sweep_data->add_option("--fractions", fractions, "Comma-separated train fractions");

  auto* sweep_manuals = app.add_subcommand("sweep-manuals", "Matching and tagging F1 against training manuals");
  std::vector<std::size_t> counts;
  sweep_manuals->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sweep_manuals->add_option("--counts", counts, "Manual counts; default 1..all")->delimiter(',');

  auto* lodo = app.add_subcommand("lodo", "Leave-one-domain-out evaluation");
  std::vector<std::string> excluded;
  lodo->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  lodo->add_option("--exclude", excluded, "Domains to exclude; default Full plus every domain")->delimiter(',');

  auto* serve = app.add_subcommand("serve", "Run the collection service");
  std::string listen;
  serve->add_option("--listen", listen, "host:port or Unix socket path");

  auto* annotate = app.add_subcommand("annotate", "Re-annotate argument spans and compare with the stored ones");
  std::string annotate_in;
  annotate->add_option("--corpus", annotate_in, "Corpus JSONL file")->required();

  auto* replay = app.add_subcommand("replay-script", "Run a session script against a running service");
  std::string script_file;
  replay->add_option("--script", script_file, "Script JSON")->required();
  replay->add_option("--listen", listen, "Service address")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = config_of(g);
    if (gen_db->parsed()) {
      if (g.seed) cfg.world.seed = *g.seed;
      auto db = generate_database(cfg.world);
      const auto text = serialize(db) + "\n";
      if (g.out.empty()) {
        std::cout << text;
      } else {
        write_file(g.out, text);
      }
      return 0;
    }
    if (g.seed && !gen_goals->parsed() && !gen_corpus->parsed()) cfg.world.seed = *g.seed;
    if (gen_manuals->parsed()) {
      if (g.out.empty()) throw Error(Error::Kind::missing_argument, "gen-manuals needs --out");
      auto w = build_world(cfg.world);
      std::filesystem::create_directories(g.out);
      for (const auto& m : w.manuals) {
        if (auto v = validate(m, w.db); !v.empty()) throw Error(Error::Kind::validation, m.id + ": " + describe(v));
        write_file(g.out + "/" + m.id + ".json", serialize(m) + "\n");
      }
      std::cout << w.manuals.size() << " manuals written to " << g.out << "\n";
      return 0;
    }
    if (gen_goals->parsed()) {
      auto db = generate_database(cfg.world);
      auto goals = sample_goals(db, g.seed.value_or(cfg.corpus.seed), goal_count, cfg.goals);
      Json out = Json::array();
      for (const auto& goal : goals) {
        auto r = render_goal(goal);
        out.push_back({{"goal", goal}, {"description", r.description}, {"table", r.table}});
      }
      emit(g, out);
      return 0;
    }
    if (gen_corpus->parsed()) {
      if (g.out.empty()) throw Error(Error::Kind::missing_argument, "gen-corpus needs --out");
      if (g.seed) cfg.corpus.seed = *g.seed;
      auto w = build_world(cfg.world);
      auto corpus = generate_corpus(w.db, w.manuals, cfg.corpus);
      save_corpus_dir(g.out, corpus);
      std::vector<Dialogue> all = corpus.train;
      all.insert(all.end(), corpus.dev.begin(), corpus.dev.end());
      all.insert(all.end(), corpus.test.begin(), corpus.test.end());
      std::cout << Json{{"stats", corpus_stats(all)}, {"failed", corpus.failed}}.dump(1) << "\n";
      return 0;
    }
    if (paraphrases->parsed()) {
      if (!variants_file.empty()) {
        auto variants = parse_json(read_file(variants_file)).get<std::vector<std::string>>();
        auto report = paraphrase_gate(variants, gate_threshold);
        emit(g, report);
        return report.accepted ? 0 : 1;
      }
      auto db = generate_database(cfg.world);
      Json rejected = Json::array();
      double worst = 0.0;
      const auto seeds = seed_library(db);
      for (const auto& seed : seeds) {
        auto report = paraphrase_gate(variant_texts(seed, db), gate_threshold);
        worst = std::max(worst, report.self_bleu);
        if (!report.accepted) rejected.push_back({{"family", seed.family}, {"self_bleu", report.self_bleu}});
      }
      emit(g, {{"families", seeds.size()}, {"worst_self_bleu", worst}, {"rejected", rejected}});
      return rejected.empty() ? 0 : 1;
    }
    if (eval->parsed() || sweep_data->parsed() || sweep_manuals->parsed() || lodo->parsed()) {
      auto w = build_world(cfg.world);
      Corpus corpus;
      auto exp = experiment_of(w, corpus_dir, corpus);
      if (eval->parsed()) {
        emit(g, run_subtask_eval(exp, cfg.eval));
      } else if (sweep_data->parsed()) {
        emit(g, sweep_data_size(exp, cfg.eval, parse_fractions(fractions), g.seed.value_or(cfg.corpus.seed)));
      } else if (sweep_manuals->parsed()) {
        if (counts.empty()) {
          for (std::size_t c = 1; c <= exp.train_manuals.size(); ++c) counts.push_back(c);
        }
        emit(g, sweep_manual_count(exp, cfg.eval, counts));
      } else {
        if (excluded.empty()) {
          excluded.push_back("Full");
          for (const auto& d : w.db.domains) excluded.push_back(d.name);
        }
        emit(g, leave_one_domain_out(exp, cfg.eval, excluded));
      }
      return 0;
    }
    if (serve->parsed()) {
      auto w = build_world(cfg.world);
      auto goals = sample_goals(w.db, cfg.service.goal_seed, cfg.service.goals, cfg.goals);
      ServiceOptions options;
      options.token_seed = cfg.service.token_seed;
      options.fuzzy_threshold = cfg.eval.fuzzy_threshold;
      Service service(w.db, w.manuals, goals, options);
      HttpServer server(service);
      active_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const auto address = listen.empty() ? cfg.service.listen : listen;
      std::cerr << "serving on " << address << " with " << goals.size() << " goals\n";
      server.listen(address);
      active_server = nullptr;
      if (!g.out.empty()) write_file(g.out, service.corpus());
      return 0;
    }
    if (annotate->parsed()) {
      auto db = generate_database(cfg.world);
      auto dialogues = load_corpus(annotate_in);
      std::size_t total = 0, agree = 0, unmatched = 0;
      for (auto& d : dialogues) {
        std::vector<CallRecord> log;
        for (const auto& t : d.turns) {
          for (std::size_t i = 0; i < t.api_calls.size() && i < t.api_results.size(); ++i) {
            log.push_back({t.index, t.api_calls[i], t.api_results[i]});
          }
        }
        auto report = fuzzy_annotate(d, log, db, cfg.eval.fuzzy_threshold);
        unmatched += report.unmatched.size();
        std::vector<ArgumentAnnotation> stored;
        for (const auto& t : d.turns) stored.insert(stored.end(), t.argument_annotations.begin(), t.argument_annotations.end());
        total += stored.size();
        for (std::size_t i = 0; i < stored.size() && i < report.annotations.size(); ++i) {
          agree += stored[i] == report.annotations[i].annotation;
        }
        for (auto& t : d.turns) t.argument_annotations.clear();
        for (const auto& a : report.annotations) {
          d.turns.at(static_cast<std::size_t>(a.turn)).argument_annotations.push_back(a.annotation);
        }
      }
      if (!g.out.empty()) save_corpus(g.out, dialogues);
      std::cout << Json{{"arguments", total},
                        {"agreeing", agree},
                        {"agreement", total ? static_cast<double>(agree) / static_cast<double>(total) : 1.0},
                        {"unmatched", unmatched}}
                       .dump(1)
                << "\n";
      return 0;
    }
    if (replay->parsed()) {
      ScriptClient client(listen, parse_json(read_file(script_file)));
      client.run();
      emit(g, client.last_reply());
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "magdial: " << kind_name(e.kind()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
