#include "magdial/nlu.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/metrics.hpp"
#include "magdial/rng.hpp"
#include "magdial/text.hpp"

namespace magdial {

std::vector<HistoryToken> history_tokens(const std::vector<Utterance>& history) {
  std::vector<HistoryToken> out;
  for (const auto& u : history) {
    for (auto& t : text::tokenize(u.text)) out.push_back({std::move(t.text), u.turn, u.speaker, t.begin, t.end});
  }
  return out;
}

std::vector<HistoryToken> history_tokens(const Dialogue& dialogue, int turn) {
  return history_tokens(history(dialogue, turn));
}

std::string to_string(const Tag& tag) {
  switch (tag.kind) {
    case TagKind::O: return "O";
    case TagKind::B: return "B-" + std::to_string(tag.index);
    case TagKind::I: return "I-" + std::to_string(tag.index);
  }
  return "O";
}

Tag tag_from_string(std::string_view s) {
  if (s == "O") return {};
  if (s.size() >= 3 && (s[0] == 'B' || s[0] == 'I') && s[1] == '-') {
    int k = 0;
    for (char c : s.substr(2)) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw Error(Error::Kind::schema, "bad tag '" + std::string(s) + "'");
      k = k * 10 + (c - '0');
    }
    if (k >= 1) return {s[0] == 'B' ? TagKind::B : TagKind::I, k};
  }
  throw Error(Error::Kind::schema, "bad tag '" + std::string(s) + "'");
}

std::vector<std::string> tag_alphabet(int max_args) {
  std::vector<std::string> out{"O"};
  for (int k = 1; k <= max_args; ++k) {
    out.push_back("B-" + std::to_string(k));
    out.push_back("I-" + std::to_string(k));
  }
  return out;
}

namespace {

bool same_utterance(const HistoryToken& a, const HistoryToken& b) { return a.turn == b.turn && a.speaker == b.speaker; }

}  // namespace

TagSequence encode(const std::vector<ArgSpan>& spans, const std::vector<HistoryToken>& tokens, int max_args,
                   int input_count) {
  if (input_count < 0) input_count = max_args;
  TagSequence seq;
  seq.tokens = tokens;
  seq.max_args = max_args;
  seq.tags.assign(tokens.size(), Tag{});
  for (const auto& s : spans) {
    if (s.index < 1 || s.index > input_count || s.index > max_args) {
      throw Error(Error::Kind::schema, "argument index " + std::to_string(s.index) + " outside 1.." +
                                           std::to_string(std::min(input_count, max_args)));
    }
    std::size_t first = tokens.size(), last = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      if (t.turn != s.span.turn || t.speaker != s.span.speaker) continue;
      if (t.begin == s.span.begin) first = i;
      if (t.end == s.span.end) last = i;
    }
    if (first == tokens.size() || last == tokens.size() || last < first) {
      throw Error(Error::Kind::encoding, "span is not aligned to token boundaries");
    }
    for (std::size_t i = first; i <= last; ++i) {
      if (seq.tags[i].kind != TagKind::O) throw Error(Error::Kind::encoding, "overlapping argument spans");
      seq.tags[i] = {i == first ? TagKind::B : TagKind::I, s.index};
    }
  }
  return seq;
}

std::vector<ArgSpan> decode(const TagSequence& sequence) {
  std::vector<ArgSpan> out;
  const auto& tokens = sequence.tokens;
  const auto& tags = sequence.tags;
  for (std::size_t i = 0; i < tags.size() && i < tokens.size(); ++i) {
    const auto& tag = tags[i];
    if (tag.kind == TagKind::O) continue;
    bool continues = tag.kind == TagKind::I && !out.empty() && i > 0 && tags[i - 1].kind != TagKind::O &&
                     tags[i - 1].index == tag.index && same_utterance(tokens[i - 1], tokens[i]);
    if (continues) {
      out.back().span.end = tokens[i].end;
    } else {
      out.push_back({tag.index, {tokens[i].turn, tokens[i].speaker, tokens[i].begin, tokens[i].end}});
    }
  }
  return out;
}

bool well_formed(const TagSequence& sequence) {
  if (sequence.tags.size() != sequence.tokens.size()) return false;
  for (std::size_t i = 0; i < sequence.tags.size(); ++i) {
    const auto& t = sequence.tags[i];
    if (t.kind == TagKind::O) continue;
    if (t.index < 1 || t.index > sequence.max_args) return false;
    if (t.kind == TagKind::I) {
      if (i == 0) return false;
      const auto& p = sequence.tags[i - 1];
      if (p.kind == TagKind::O || p.index != t.index) return false;
    }
  }
  return true;
}

std::optional<FuzzyMatch> best_match(const std::vector<Utterance>& history, std::string_view value, double threshold) {
  const auto value_tokens = text::tokenize(value);
  if (value_tokens.empty()) return std::nullopt;
  const std::size_t n = value_tokens.size();
  std::string value_key;
  for (const auto& t : value_tokens) value_key += t.text + '\x1f';

  std::vector<std::vector<text::Token>> toks(history.size());
  for (std::size_t u = 0; u < history.size(); ++u) toks[u] = text::tokenize(history[u].text);

  // Exact token-sequence match: similarity 1, the latest occurrence wins.
  for (std::size_t u = history.size(); u-- > 0;) {
    const auto& t = toks[u];
    for (std::size_t i = t.size() >= n ? t.size() - n + 1 : 0; i-- > 0;) {
      std::string key;
      for (std::size_t j = i; j < i + n; ++j) key += t[j].text + '\x1f';
      if (key == value_key) return FuzzyMatch{{history[u].turn, history[u].speaker, t[i].begin, t[i + n - 1].end}, 1.0};
    }
  }

  const auto value_cp = text::to_u32(text::normalize(value));
  std::optional<FuzzyMatch> best;
  for (std::size_t u = history.size(); u-- > 0;) {
    const auto& t = toks[u];
    const std::string_view utterance = history[u].text;
    for (std::size_t i = t.size(); i-- > 0;) {
      for (std::size_t len = n > 2 ? n - 2 : 1; len <= n + 2 && i + len <= t.size(); ++len) {
        auto b = t[i].begin, e = t[i + len - 1].end;
        auto cp = text::to_u32(text::normalize(utterance.substr(b, e - b)));
        double total = static_cast<double>(cp.size() + value_cp.size());
        double bound = 2.0 * static_cast<double>(std::min(cp.size(), value_cp.size())) / total;
        if (bound < threshold || (best && bound <= best->similarity)) continue;
        double sim = 1.0 - static_cast<double>(text::indel_distance(cp, value_cp)) / total;
        if (sim >= threshold && (!best || sim > best->similarity + 1e-12)) {
          best = FuzzyMatch{{history[u].turn, history[u].speaker, b, e}, sim};
        }
      }
    }
  }
  return best;
}

AnnotationReport fuzzy_annotate(const Dialogue& dialogue, const std::vector<CallRecord>& log, const Database& db,
                                double threshold) {
  AnnotationReport report;
  for (const auto& rec : log) {
    if (!rec.call.instruction) continue;
    const auto* spec = db.api(rec.call.api);
    auto hist = history(dialogue, rec.turn);
    for (const auto& arg : rec.call.args) {
      int k = spec ? spec->input_index(arg.attribute) : 0;
      auto m = k > 0 ? best_match(hist, arg.value, threshold) : std::nullopt;
      if (m) {
        report.annotations.push_back({rec.turn, {*rec.call.instruction, k, m->span}, m->similarity});
      } else {
        report.unmatched.push_back({rec.turn, *rec.call.instruction, rec.call.api, arg.attribute, arg.value});
      }
    }
  }
  return report;
}

// ---- matching --------------------------------------------------------------

ValueSpotter::ValueSpotter(const Database& db) {
  auto add = [&](const std::string& value, const DomainName& domain, const Attribute& attr) {
    max_tokens_ = std::max(max_tokens_, text::tokenize(value).size());
    values_[text::normalize(value)].insert({domain, attr});
  };
  for (const auto& [d, list] : db.entities) {
    for (const auto& e : list) {
      for (const auto& [a, v] : e.attributes) add(v, d, a);
    }
  }
  for (const auto& [d, attrs] : db.value_sets) {
    for (const auto& [a, values] : attrs) {
      for (const auto& v : values) add(v, d, a);
    }
  }
}

std::set<Attribute> ValueSpotter::attributes(std::string_view text) const {
  std::set<Attribute> out;
  for (const auto& [d, a] : spot(text)) out.insert(a);
  return out;
}

std::set<std::pair<DomainName, Attribute>> ValueSpotter::spot(std::string_view text) const {
  auto toks = text::tokenize(text);
  std::set<std::pair<DomainName, Attribute>> found;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    for (std::size_t len = 1; len <= max_tokens_ && i + len <= toks.size(); ++len) {
      auto window = text::normalize(text.substr(toks[i].begin, toks[i + len - 1].end - toks[i].begin));
      if (auto it = values_.find(window); it != values_.end()) found.insert(it->second.begin(), it->second.end());
    }
  }
  return found;
}

LexicalMatcher::LexicalMatcher(const Database& db) : spotter_(db) {}

const SearchIndex& LexicalMatcher::index_for(const Manual& manual) {
  auto& slot = indexes_[manual.id + "#" + std::to_string(manual.instructions.size())];
  if (!slot) slot = std::make_unique<SearchIndex>(manual, SearchIndex::Field::full_text);
  return *slot;
}

std::vector<double> LexicalMatcher::scores(const Dialogue& dialogue, int turn, const Manual& manual) {
  const auto& index = index_for(manual);
  auto hist = history(dialogue, turn);
  if (hist.empty()) return std::vector<double>(manual.instructions.size(), 0.0);
  TermWeights query;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    SearchIndex::add_terms(query, hist[i].text, i + 1 == hist.size() ? 2.0 : 1.0);
  }
  for (const auto& a : spotter_.attributes(hist.back().text)) {
    for (const auto& w : mention_words(a)) SearchIndex::add_terms(query, w, 1.0);
  }
  return index.scores(query);
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void add_features(std::vector<std::uint64_t>& out, std::string_view prefix, std::string_view s, bool bigrams) {
  auto ts = text::terms(s);
  std::string p(prefix);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out.push_back(fnv1a(p + ":" + ts[i]));
    if (bigrams && i + 1 < ts.size()) out.push_back(fnv1a(p + "2:" + ts[i] + " " + ts[i + 1]));
  }
}

void dedupe(std::vector<std::uint64_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

PairMatcher::PairMatcher(const Database& db, PairMatcherOptions options)
    : spotter_(db), options_(options) {
  if (options_.hash_bits < 8 || options_.hash_bits > 28) throw Error(Error::Kind::config, "hash_bits outside [8, 28]");
  weights_.assign(std::size_t{1} << options_.hash_bits, 0.0f);
  mask_ = (std::uint64_t{1} << options_.hash_bits) - 1;
}

std::vector<std::uint64_t> PairMatcher::context(const Dialogue& dialogue, int turn) const {
  std::vector<std::uint64_t> out{fnv1a("bias")};
  const auto& t = dialogue.turns.at(static_cast<std::size_t>(turn));
  add_features(out, "u", t.user_utterance, true);
  for (const auto& [d, a] : spotter_.spot(t.user_utterance)) {
    out.push_back(fnv1a("v:" + a));
    out.push_back(fnv1a("vd:" + d));
  }
  if (turn > 0) {
    const auto& prev = dialogue.turns[static_cast<std::size_t>(turn - 1)].agent_response;
    add_features(out, "a", prev, false);
    for (const auto& [d, a] : spotter_.spot(prev)) out.push_back(fnv1a("w:" + a));
    // Domains of the latest agent response that names database values.
    for (int k = turn - 1; k >= 0; --k) {
      auto found = spotter_.spot(dialogue.turns[static_cast<std::size_t>(k)].agent_response);
      if (found.empty()) continue;
      for (const auto& [d, a] : found) out.push_back(fnv1a("cur:" + d));
      break;
    }
  } else {
    out.push_back(fnv1a("first"));
  }
  dedupe(out);
  return out;
}

const std::vector<std::vector<std::uint64_t>>& PairMatcher::conditions(const Manual& manual) {
  auto& slot = conditions_[manual.id + "#" + std::to_string(manual.instructions.size())];
  if (slot.empty()) {
    for (const auto& ins : manual.instructions) {
      std::vector<std::uint64_t> c{fnv1a("bias")};
      add_features(c, "c", ins.condition, true);
      dedupe(c);
      slot.push_back(std::move(c));
    }
  }
  return slot;
}

double PairMatcher::logit(const std::vector<std::uint64_t>& ctx, const std::vector<std::uint64_t>& cond) const {
  const double x = 1.0 / std::sqrt(static_cast<double>(ctx.size() * cond.size()));
  double z = 0.0;
  for (auto q : ctx) {
    const auto hq = q * 0x9e3779b97f4a7c15ULL;
    for (auto c : cond) z += weights_[mix(hq ^ c) & mask_];
  }
  return z * x;
}

void PairMatcher::update(const std::vector<std::uint64_t>& ctx, const std::vector<std::uint64_t>& cond,
                         double gradient) {
  const double x = 1.0 / std::sqrt(static_cast<double>(ctx.size() * cond.size()));
  const auto step = static_cast<float>(options_.learning_rate * gradient * x);
  const auto decay = static_cast<float>(1.0 - options_.learning_rate * options_.l2);
  for (auto q : ctx) {
    const auto hq = q * 0x9e3779b97f4a7c15ULL;
    for (auto c : cond) {
      auto& w = weights_[mix(hq ^ c) & mask_];
      w = w * decay - step;
    }
  }
}

void PairMatcher::fit(const std::vector<Dialogue>& dialogues, const std::map<std::string, const Manual*>& manuals) {
  struct Example {
    std::vector<std::uint64_t> ctx;
    const Manual* manual;
    std::vector<std::size_t> positives;
  };
  std::vector<Example> examples;
  for (const auto& d : dialogues) {
    auto it = manuals.find(d.manual_id);
    if (it == manuals.end() || !it->second) continue;
    const auto& manual = *it->second;
    conditions(manual);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      Example e{context(d, static_cast<int>(t)), &manual, {}};
      for (const auto& id : d.turns[t].selected_instructions) {
        for (std::size_t i = 0; i < manual.instructions.size(); ++i) {
          if (manual.instructions[i].id == id) e.positives.push_back(i);
        }
      }
      examples.push_back(std::move(e));
    }
  }
  if (examples.empty()) throw Error(Error::Kind::argument, "no training turns with a known manual");
  std::fill(weights_.begin(), weights_.end(), 0.0f);
  Rng rng(options_.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto k : order) {
      const auto& e = examples[k];
      const auto& conds = conditions(*e.manual);
      std::set<std::size_t> pos(e.positives.begin(), e.positives.end());
      auto train = [&](std::size_t i, double label) {
        const double p = sigmoid(logit(e.ctx, conds[i]));
        update(e.ctx, conds[i], p - label);
      };
      for (auto i : pos) train(i, 1.0);
      const auto n = conds.size();
      for (std::size_t s = 0; s < options_.negatives && pos.size() < n; ++s) {
        auto i = rng.below(n);
        if (!pos.count(i)) train(i, 0.0);
      }
    }
  }
  fitted_ = true;
}

std::vector<double> PairMatcher::scores(const Dialogue& dialogue, int turn, const Manual& manual) {
  if (!fitted_) throw Error(Error::Kind::predictor, "pair matcher used before fit");
  const auto ctx = context(dialogue, turn);
  const auto& conds = conditions(manual);
  std::vector<double> out;
  out.reserve(conds.size());
  for (const auto& c : conds) out.push_back(sigmoid(logit(ctx, c)));
  return out;
}

std::vector<MatchDecision> match(const Dialogue& dialogue, int turn, const Manual& manual, Matcher& matcher,
                                 double threshold) {
  auto s = matcher.scores(dialogue, turn, manual);
  if (s.size() != manual.instructions.size()) throw Error(Error::Kind::predictor, "matcher returned wrong score count");
  std::vector<MatchDecision> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({manual.instructions[i].id, s[i], s[i] >= threshold});
  return out;
}

std::vector<double> threshold_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

double pick_operating_point(const std::vector<ScoredTurn>& dev, Objective objective) {
  if (dev.empty()) throw Error(Error::Kind::argument, "pick_operating_point: empty dev set");
  double best_t = 0.0, best_v = -1.0;
  for (double t : threshold_grid()) {
    std::vector<LabelSet> pred, gold;
    for (const auto& turn : dev) {
      LabelSet p;
      for (std::size_t i = 0; i < turn.instructions.size() && i < turn.scores.size(); ++i) {
        if (turn.scores[i] >= t) p.insert(turn.instructions[i]);
      }
      pred.push_back(std::move(p));
      gold.emplace_back(turn.gold.begin(), turn.gold.end());
    }
    auto r = set_prf(pred, gold).macro;
    double v = objective == Objective::f1 ? r.f1 : r.recall;
    if (v > best_v + 1e-12) {
      best_v = v;
      best_t = t;
    }
  }
  return best_t;
}

// ---- tagging ---------------------------------------------------------------

namespace {

std::string token_key(const std::vector<text::Token>& t, std::size_t i, std::size_t n) {
  std::string key;
  for (std::size_t j = i; j < i + n; ++j) key += t[j].text + '\x1f';
  return key;
}

bool contains_any(std::string_view hay, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(), [&](auto n) { return hay.find(n) != std::string_view::npos; });
}

enum class Cue { none, reference, count, clock };

Cue mention_cue(std::string_view mention) {
  auto m = text::normalize(mention);
  if (contains_any(m, {"reference", "code", "reservation number"})) return Cue::reference;
  if (contains_any(m, {"people", "party", "group", "head", "guest", "night", "stay"})) return Cue::count;
  if (contains_any(m, {"time", "hour", "slot", "clock", "moment", "arrival", "deadline"})) return Cue::clock;
  return Cue::none;
}

bool is_reference(const std::string& surface) {
  if (surface.size() != 8) return false;
  bool digit = false, alpha = false;
  for (char c : surface) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      alpha = true;
    } else {
      return false;
    }
  }
  return digit && alpha;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

const std::map<Attribute, std::vector<std::string>>& context_cues() {
  static const std::map<Attribute, std::vector<std::string>> cues = {
      {"departure", {"from"}},
      {"destination", {"to", "towards"}},
      {"leave", {"leave", "leaving", "after", "depart", "departing", "go", "off"}},
      {"arrive", {"arrive", "arriving", "by", "before", "reach"}},
  };
  return cues;
}

struct Candidate {
  std::size_t utterance = 0;
  std::size_t first = 0;  // token index within the utterance
  std::size_t count = 0;
  bool cued = false;
  double similarity = 1.0;
};

}  // namespace

LexiconTagger::LexiconTagger(const Database& db, LexiconTaggerOptions options) : db_(db), options_(options) {}

const LexiconTagger::Lexicon& LexiconTagger::lexicon(const DomainName& domain, const Attribute& attribute) {
  auto key = std::make_pair(domain, attribute);
  auto it = lexicons_.find(key);
  if (it != lexicons_.end()) return it->second;
  Lexicon lex;
  for (const auto& v : db_.values(domain, attribute)) {
    auto toks = text::tokenize(v);
    if (toks.empty()) continue;
    lex.max_tokens = std::max(lex.max_tokens, toks.size());
    lex.exact.emplace(token_key(toks, 0, toks.size()), v);
    for (const auto& t : toks) lex.by_token[t.text].push_back(v);
  }
  return lexicons_.emplace(key, std::move(lex)).first->second;
}

const LexiconTagger::Lexicon& LexiconTagger::global_lexicon() {
  if (global_) return *global_;
  Lexicon lex;
  for (const auto& schema : db_.domains) {
    for (const auto& a : schema.attributes) {
      for (const auto& v : db_.values(schema.name, a)) {
        auto toks = text::tokenize(v);
        if (toks.empty()) continue;
        lex.max_tokens = std::max(lex.max_tokens, toks.size());
        lex.exact.emplace(token_key(toks, 0, toks.size()), v);
      }
    }
  }
  global_ = std::move(lex);
  return *global_;
}

TagSequence LexiconTagger::tag(const Dialogue& dialogue, int turn, const Instruction& instruction) {
  auto hist = history(dialogue, turn);
  TagSequence seq;
  seq.max_args = options_.max_args;
  std::vector<std::vector<text::Token>> toks(hist.size());
  std::vector<std::size_t> offset(hist.size(), 0);
  for (std::size_t u = 0; u < hist.size(); ++u) {
    toks[u] = text::tokenize(hist[u].text);
    offset[u] = seq.tokens.size();
    for (const auto& t : toks[u]) seq.tokens.push_back({t.text, hist[u].turn, hist[u].speaker, t.begin, t.end});
  }
  seq.tags.assign(seq.tokens.size(), Tag{});
  if (!instruction.api || hist.empty()) return seq;

  auto mark = [&](const Candidate& c, int k) {
    for (std::size_t j = 0; j < c.count; ++j) {
      seq.tags[offset[c.utterance] + c.first + j] = {j == 0 ? TagKind::B : TagKind::I, k};
    }
  };
  auto free_range = [&](std::size_t u, std::size_t i, std::size_t n) {
    for (std::size_t j = i; j < i + n; ++j) {
      if (seq.tags[offset[u] + j].kind != TagKind::O) return false;
    }
    return true;
  };

  if (!options_.use_manual) {
    const auto& lex = global_lexicon();
    std::size_t u = hist.size() - 1;
    const auto& t = toks[u];
    int k = 0;
    for (std::size_t i = 0; i < t.size() && k < options_.max_args;) {
      std::size_t hit = 0;
      for (std::size_t n = std::min(lex.max_tokens, t.size() - i); n >= 1; --n) {
        if (lex.exact.count(token_key(t, i, n))) {
          hit = n;
          break;
        }
      }
      if (hit) {
        mark({u, i, hit, false, 1.0}, ++k);
        i += hit;
      } else {
        ++i;
      }
    }
    return seq;
  }

  const auto& mentions = instruction.api->mentions;
  const int inputs = std::min<int>(static_cast<int>(mentions.size()), options_.max_args);
  for (int k = 1; k <= inputs; ++k) {
    const auto& m = mentions[static_cast<std::size_t>(k - 1)];
    std::string_view surface =
        std::string_view(instruction.api->description).substr(m.begin, m.end - m.begin);
    const auto cue = mention_cue(surface);
    const auto& lex = lexicon(instruction.domain, m.attribute);
    const auto cue_it = context_cues().find(m.attribute);

    auto cued = [&](std::size_t u, std::size_t i) {
      if (cue_it == context_cues().end()) return false;
      for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
        const auto& w = toks[u][i - back].text;
        if (std::find(cue_it->second.begin(), cue_it->second.end(), w) != cue_it->second.end()) return true;
      }
      return false;
    };

    std::optional<Candidate> chosen;
    for (std::size_t u = hist.size(); u-- > 0 && !chosen;) {
      const auto& t = toks[u];
      const std::string_view text = hist[u].text;
      std::vector<Candidate> found;
      for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t n = 1; n <= lex.max_tokens && i + n <= t.size(); ++n) {
          if (lex.exact.count(token_key(t, i, n)) && free_range(u, i, n)) found.push_back({u, i, n, cued(u, i), 1.0});
        }
        std::string raw(text.substr(t[i].begin, t[i].end - t[i].begin));
        if (cue == Cue::reference && is_reference(raw) && free_range(u, i, 1)) found.push_back({u, i, 1, true, 1.0});
        if (cue == Cue::count && all_digits(raw) && raw.size() <= 2 && free_range(u, i, 1)) {
          bool near = false;
          for (std::size_t j = i + 1; j <= i + 2 && j < t.size(); ++j) {
            near = near || contains_any(t[j].text, {"people", "person", "guest", "night", "adult"});
          }
          if (near) found.push_back({u, i, 1, true, 1.0});
        }
        if (cue == Cue::clock && i + 2 < t.size() && all_digits(t[i].text) && t[i + 1].text == ":" &&
            all_digits(t[i + 2].text) && t[i + 2].text.size() == 2 && free_range(u, i, 3)) {
          found.push_back({u, i, 3, cued(u, i), 1.0});
        }
      }
      if (found.empty()) continue;
      // Longest first, then cued, then latest position.
      std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
        if (a.cued != b.cued) return a.cued;
        if (a.first + a.count != b.first + b.count) return a.first + a.count > b.first + b.count;
        return a.count > b.count;
      });
      chosen = found.front();
    }

    if (!chosen && !lex.by_token.empty()) {
      // Fuzzy fallback over windows sharing a token with some lexicon value.
      double best = options_.threshold;
      for (std::size_t u = hist.size(); u-- > 0;) {
        const auto& t = toks[u];
        const std::string_view text = hist[u].text;
        for (std::size_t i = t.size(); i-- > 0;) {
          for (std::size_t n = 1; n <= lex.max_tokens + 1 && i + n <= t.size(); ++n) {
            if (!free_range(u, i, n)) break;
            std::set<std::string> pool;
            for (std::size_t j = i; j < i + n; ++j) {
              if (auto it = lex.by_token.find(t[j].text); it != lex.by_token.end()) pool.insert(it->second.begin(), it->second.end());
              if (pool.size() > 200) break;
            }
            auto window = text.substr(t[i].begin, t[i + n - 1].end - t[i].begin);
            for (const auto& v : pool) {
              double s = text::similarity(window, v);
              if (s > best + 1e-12 || (s >= best && !chosen)) {
                best = s;
                chosen = Candidate{u, i, n, false, s};
              }
            }
          }
        }
        if (chosen) break;
      }
    }
    if (chosen) mark(*chosen, k);
  }
  return seq;
}

TagSequence baseline_tag(const Dialogue& dialogue, int turn, const Instruction& instruction, const Database& db) {
  LexiconTagger tagger(db);
  return tagger.tag(dialogue, turn, instruction);
}

}  // namespace magdial
