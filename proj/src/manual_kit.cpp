#include "magdial/manual_kit.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "magdial/bleu.hpp"
#include "magdial/error.hpp"
#include "magdial/text.hpp"
#include "magdial/world.hpp"

namespace magdial {

void to_json(Json& j, const SeedVariant& v) {
  j = Json{{"condition", v.condition}, {"solution", v.solution}};
  if (!v.api_description.empty()) j["api_description"] = v.api_description;
}

void from_json(const Json& j, SeedVariant& v) {
  v.condition = j.at("condition").get<std::string>();
  v.solution = j.at("solution").get<std::string>();
  v.api_description = j.value("api_description", std::string());
}

void to_json(Json& j, const SeedInstruction& v) {
  j = Json{{"family", v.family}, {"domain", v.domain}, {"variants", v.variants}};
  if (v.api) j["api"] = *v.api;
}

void from_json(const Json& j, SeedInstruction& v) {
  v.family = j.at("family").get<std::string>();
  v.domain = j.at("domain").get<std::string>();
  v.variants = j.at("variants").get<std::vector<SeedVariant>>();
  v.api.reset();
  if (j.contains("api")) v.api = j.at("api").get<std::string>();
}

const std::vector<std::string>& mention_words(const Attribute& attribute) {
  static const std::map<Attribute, std::vector<std::string>> words = {
      {"address", {"address", "street address", "location details"}},
      {"area", {"area", "district", "part of town", "neighborhood", "location"}},
      {"arrive", {"arrival", "latest arrival", "reach deadline", "arrive-by hour"}},
      {"car", {"car", "vehicle", "car model"}},
      {"choice", {"number of choices", "option count"}},
      {"class", {"seat class", "ticket class", "class"}},
      {"day", {"day", "date", "booking day", "check-in date"}},
      {"department", {"department", "specialty", "medical department", "clinic section"}},
      {"departure", {"departure", "starting point", "origin", "pickup point", "from location"}},
      {"destination", {"destination", "target place", "drop-off spot", "final stop"}},
      {"facility", {"facility", "amenity", "feature"}},
      {"food", {"food type", "cuisine", "kind of food", "dish style"}},
      {"id", {"train id", "train number", "id"}},
      {"leave", {"leaving hour", "set-off moment", "time to go", "start clock"}},
      {"name", {"name", "title", "entity name"}},
      {"people", {"number of people", "party size", "group size", "head count", "guests"}},
      {"phone", {"phone number", "telephone", "contact number"}},
      {"postcode", {"postcode", "zip code", "postal code"}},
      {"price", {"price range", "budget", "price level", "cost"}},
      {"reference num.", {"reference number", "booking reference", "confirmation code", "reservation number"}},
      {"score", {"score", "rating", "review score"}},
      {"station", {"nearest station", "metro station", "subway stop", "station"}},
      {"star", {"star rating", "stars", "star level", "hotel class"}},
      {"stay", {"nights", "length of stay", "stay duration", "night count"}},
      {"time", {"time", "booking time", "reservation hour", "slot"}},
      {"type", {"type", "category", "kind"}},
  };
  auto it = words.find(attribute);
  if (it == words.end()) {
    static std::map<Attribute, std::vector<std::string>> extra;
    auto& e = extra[attribute];
    if (e.empty()) e.push_back(attribute);
    return e;
  }
  return it->second;
}

std::string mention_word(const Attribute& attribute, std::size_t paraphrase_set) {
  const auto& w = mention_words(attribute);
  return w[paraphrase_set % w.size()];
}

std::string manual_id(std::size_t paraphrase_set) {
  std::string n = std::to_string(paraphrase_set);
  return "m" + std::string(n.size() < 2 ? 2 - n.size() : 0, '0') + n;
}

std::string slug(std::string_view s) {
  std::string out;
  bool dash = false;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (dash && !out.empty()) out.push_back('-');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

namespace {

struct Rendered {
  std::string text;
  std::vector<Mention> mentions;
};

// Expands <attr> and <attr|surface>; {..} is copied through untouched.
Rendered render(std::string_view tmpl, std::size_t set, const Database* db, std::string_view where) {
  Rendered r;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '<') {
      r.text.push_back(tmpl[i++]);
      continue;
    }
    auto close = tmpl.find('>', i);
    if (close == std::string_view::npos) {
      throw Error(Error::Kind::compile, std::string(where) + ": unterminated mention placeholder");
    }
    std::string body(tmpl.substr(i + 1, close - i - 1));
    std::string attribute = body, surface;
    if (auto bar = body.find('|'); bar != std::string::npos) {
      attribute = body.substr(0, bar);
      surface = body.substr(bar + 1);
    }
    if (db && !db->registered(attribute)) {
      throw Error(Error::Kind::compile, std::string(where) + ": unknown attribute '" + attribute + "'");
    }
    if (surface.empty()) surface = mention_word(attribute, set);
    std::size_t begin = r.text.size();
    r.text += surface;
    r.mentions.push_back({attribute, begin, r.text.size()});
    i = close + 1;
  }
  return r;
}

}  // namespace

Manual compile_manual(const std::vector<SeedInstruction>& seeds, std::size_t paraphrase_set, const Database& db) {
  Manual m;
  m.id = manual_id(paraphrase_set);
  std::set<std::string> families;
  for (const auto& seed : seeds) {
    if (!families.insert(seed.family).second) {
      throw Error(Error::Kind::compile, "duplicate family '" + seed.family + "'");
    }
    if (paraphrase_set >= seed.variants.size()) {
      throw Error(Error::Kind::compile, seed.family + ": no variant for paraphrase set " + std::to_string(paraphrase_set));
    }
    const auto& v = seed.variants[paraphrase_set];
    Instruction ins;
    ins.id = m.id + "/" + seed.family;
    ins.family = seed.family;
    ins.domain = seed.domain;
    ins.condition = render(v.condition, paraphrase_set, &db, seed.family).text;
    ins.solution = render(v.solution, paraphrase_set, &db, seed.family).text;
    if (ins.condition.empty() || ins.solution.empty()) {
      throw Error(Error::Kind::compile, seed.family + ": empty condition or solution");
    }
    if (seed.api) {
      const ApiSpec* spec = db.api(*seed.api);
      if (!spec) throw Error(Error::Kind::compile, seed.family + ": unknown api '" + *seed.api + "'");
      auto desc = render(v.api_description, paraphrase_set, &db, seed.family);
      if (desc.mentions.size() != spec->inputs.size()) {
        throw Error(Error::Kind::compile, seed.family + ": " + std::to_string(desc.mentions.size()) +
                                              " mentions for " + std::to_string(spec->inputs.size()) +
                                              "-input api " + spec->name);
      }
      for (std::size_t k = 0; k < desc.mentions.size(); ++k) {
        if (desc.mentions[k].attribute != spec->inputs[k].attribute) {
          throw Error(Error::Kind::compile, seed.family + ": mention " + std::to_string(k + 1) + " is '" +
                                                desc.mentions[k].attribute + "', api input is '" +
                                                spec->inputs[k].attribute + "'");
        }
      }
      ins.api = InstructionApi{spec->name, desc.text, desc.mentions};
    } else if (!v.api_description.empty()) {
      throw Error(Error::Kind::compile, seed.family + ": api description without api");
    }
    m.instructions.push_back(std::move(ins));
  }
  return m;
}

void to_json(Json& j, const NgramOverlap& v) {
  j = Json{{"hypothesis", v.hypothesis}, {"reference", v.reference}, {"matches", v.matches},
           {"totals", v.totals},         {"bleu", v.bleu}};
}

void to_json(Json& j, const GateReport& v) {
  j = Json{{"threshold", v.threshold}, {"self_bleu", v.self_bleu}, {"variant_scores", v.variant_scores},
           {"pairs", v.pairs},         {"accepted", v.accepted}};
}

GateReport paraphrase_gate(const std::vector<std::string>& variants, double threshold) {
  if (variants.size() < 2) throw Error(Error::Kind::argument, "paraphrase gate needs at least two variants");
  std::vector<bleu::NgramCounts> counts;
  counts.reserve(variants.size());
  for (std::size_t i = 0; i < variants.size(); ++i) {
    counts.push_back(bleu::count_ngrams(text::terms(variants[i])));
    if (counts.back().length == 0) {
      throw Error(Error::Kind::degenerate_input, "variant " + std::to_string(i) + " has no tokens");
    }
  }
  GateReport report;
  report.threshold = threshold;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::vector<const bleu::NgramCounts*> refs;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (j != i) refs.push_back(&counts[j]);
    }
    report.variant_scores.push_back(bleu::score(bleu::sentence_stats(counts[i], refs)));
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (j == i) continue;
      auto s = bleu::sentence_stats(counts[i], {&counts[j]});
      report.pairs.push_back({i, j, s.matches, s.totals, bleu::score(s)});
    }
  }
  // Summing in sorted order keeps the mean independent of variant order.
  auto sorted = report.variant_scores;
  std::sort(sorted.begin(), sorted.end());
  report.self_bleu = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  report.accepted = report.self_bleu < threshold;
  return report;
}

std::vector<std::string> variant_texts(const SeedInstruction& seed, const Database& db) {
  std::vector<std::string> out;
  for (std::size_t s = 0; s < seed.variants.size(); ++s) {
    out.push_back(compile_manual({seed}, s, db).instructions.front().full_text());
  }
  return out;
}

}  // namespace magdial
