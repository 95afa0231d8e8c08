#pragma once

// Instruction matching and argument filling: index-extended BIO codec, fuzzy
// span annotation, the lexical matcher and the lexicon tagger.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "magdial/api_engine.hpp"
#include "magdial/model.hpp"
#include "magdial/search_index.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

inline constexpr double kFuzzyThreshold = 0.8;
inline constexpr int kDefaultMaxArgs = 2;

// ---- tokens of D_t ---------------------------------------------------------

struct HistoryToken {
  std::string text;  // case-folded
  int turn = 0;
  Speaker speaker = Speaker::user;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const HistoryToken&) const = default;
};

// Tokens of U_1, R_1, ..., U_t in order.
std::vector<HistoryToken> history_tokens(const Dialogue& dialogue, int turn);
std::vector<HistoryToken> history_tokens(const std::vector<Utterance>& history);

// ---- BIO-index codec -------------------------------------------------------

enum class TagKind { O, B, I };

struct Tag {
  TagKind kind = TagKind::O;
  int index = 0;  // 1-based argument index for B/I
  bool operator==(const Tag&) const = default;
};

std::string to_string(const Tag& tag);
Tag tag_from_string(std::string_view s);

// O, B-1, I-1, ..., B-n, I-n.
std::vector<std::string> tag_alphabet(int max_args);

struct TagSequence {
  std::vector<HistoryToken> tokens;
  std::vector<Tag> tags;
  int max_args = kDefaultMaxArgs;
  bool operator==(const TagSequence&) const = default;
};

struct ArgSpan {
  int index = 0;
  Span span;
  auto operator<=>(const ArgSpan&) const = default;
};

// Spans must start and end on token boundaries. Throws Error(encoding) on
// overlapping or unaligned spans and Error(schema) when an index exceeds
// `input_count` (defaults to max_args).
TagSequence encode(const std::vector<ArgSpan>& spans, const std::vector<HistoryToken>& tokens,
                   int max_args = kDefaultMaxArgs, int input_count = -1);

// Spans in token order. A stray I-k is read as the start of a span.
std::vector<ArgSpan> decode(const TagSequence& sequence);

// True iff every I-k follows B-k or I-k and every index is within max_args.
bool well_formed(const TagSequence& sequence);

// ---- fuzzy span annotation -------------------------------------------------

struct FuzzyMatch {
  Span span;
  double similarity = 0.0;
};

// Token-aligned window of D_t most similar to `value`; ties prefer later
// utterances, then later positions. nullopt below `threshold`.
std::optional<FuzzyMatch> best_match(const std::vector<Utterance>& history, std::string_view value,
                                     double threshold = kFuzzyThreshold);

struct TurnAnnotation {
  int turn = 0;
  ArgumentAnnotation annotation;
  double similarity = 0.0;
};

struct UnmatchedArg {
  int turn = 0;
  std::string instruction;
  std::string api;
  Attribute attribute;
  std::string value;
};

struct AnnotationReport {
  std::vector<TurnAnnotation> annotations;
  std::vector<UnmatchedArg> unmatched;
};

// Annotates every logged argument of calls that carry an instruction id.
AnnotationReport fuzzy_annotate(const Dialogue& dialogue, const std::vector<CallRecord>& log, const Database& db,
                                double threshold = kFuzzyThreshold);

// ---- instruction matching --------------------------------------------------

struct MatchDecision {
  std::string instruction;
  double score = 0.0;
  bool selected = false;
  bool operator==(const MatchDecision&) const = default;
};

class Matcher {
 public:
  virtual ~Matcher() = default;
  // One score in [0, 1] per instruction of `manual`, in manual order.
  virtual std::vector<double> scores(const Dialogue& dialogue, int turn, const Manual& manual) = 0;
};

// Database values found in a text, reported by domain and attribute.
class ValueSpotter {
 public:
  explicit ValueSpotter(const Database& db);
  std::set<std::pair<DomainName, Attribute>> spot(std::string_view text) const;
  std::set<Attribute> attributes(std::string_view text) const;

 private:
  std::unordered_map<std::string, std::set<std::pair<DomainName, Attribute>>> values_;  // normalized value -> owners
  std::size_t max_tokens_ = 1;
};

// TF-IDF cosine between D_t and each instruction's full text. The last user
// utterance counts twice; attribute mention words of database values found in
// it are added to the query.
class LexicalMatcher : public Matcher {
 public:
  explicit LexicalMatcher(const Database& db);
  std::vector<double> scores(const Dialogue& dialogue, int turn, const Manual& manual) override;

 private:
  const SearchIndex& index_for(const Manual& manual);
  std::map<std::string, std::unique_ptr<SearchIndex>> indexes_;
  ValueSpotter spotter_;
};

struct PairMatcherOptions {
  int epochs = 3;
  double learning_rate = 4.0;
  double l2 = 1e-6;
  // Negative instructions sampled per turn; all positives are kept.
  std::size_t negatives = 24;
  int hash_bits = 22;
  std::uint64_t seed = 17;
};

// Logistic model over hashed crosses of context features (terms of the last
// user utterance and the preceding agent response, attributes of database
// values they contain) with the terms of an instruction's condition. Fitted on
// annotated dialogues; reads only the condition text, so it applies to unseen
// manuals.
class PairMatcher : public Matcher {
 public:
  explicit PairMatcher(const Database& db, PairMatcherOptions options = {});
  // Throws Error(argument) when no dialogue has a known manual.
  void fit(const std::vector<Dialogue>& dialogues, const std::map<std::string, const Manual*>& manuals);
  std::vector<double> scores(const Dialogue& dialogue, int turn, const Manual& manual) override;
  bool fitted() const { return fitted_; }

 private:
  std::vector<std::uint64_t> context(const Dialogue& dialogue, int turn) const;
  const std::vector<std::vector<std::uint64_t>>& conditions(const Manual& manual);
  double logit(const std::vector<std::uint64_t>& ctx, const std::vector<std::uint64_t>& cond) const;
  void update(const std::vector<std::uint64_t>& ctx, const std::vector<std::uint64_t>& cond, double gradient);

  ValueSpotter spotter_;
  PairMatcherOptions options_;
  std::vector<float> weights_;
  std::uint64_t mask_ = 0;
  bool fitted_ = false;
  std::map<std::string, std::vector<std::vector<std::uint64_t>>> conditions_;
};

std::vector<MatchDecision> match(const Dialogue& dialogue, int turn, const Manual& manual, Matcher& matcher,
                                 double threshold);

enum class Objective { f1, recall };

struct ScoredTurn {
  std::vector<std::string> instructions;
  std::vector<double> scores;
  std::set<std::string> gold;
};

// Thresholds 0.01, 0.02, ..., 1.00; the one maximizing the macro objective,
// ties to the lower threshold. Throws Error(argument) on an empty set.
double pick_operating_point(const std::vector<ScoredTurn>& dev, Objective objective);
std::vector<double> threshold_grid();

// ---- argument filling ------------------------------------------------------

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual TagSequence tag(const Dialogue& dialogue, int turn, const Instruction& instruction) = 0;
};

struct LexiconTaggerOptions {
  double threshold = kFuzzyThreshold;
  int max_args = kDefaultMaxArgs;
  // Without the manual the tagger cannot read attribute mentions: it tags
  // database values in the last user utterance in order of appearance.
  bool use_manual = true;
};

class LexiconTagger : public Tagger {
 public:
  LexiconTagger(const Database& db, LexiconTaggerOptions options = {});
  TagSequence tag(const Dialogue& dialogue, int turn, const Instruction& instruction) override;

 private:
  struct Lexicon {
    std::unordered_map<std::string, std::string> exact;  // normalized -> surface value
    std::unordered_map<std::string, std::vector<std::string>> by_token;
    std::size_t max_tokens = 1;
  };
  const Lexicon& lexicon(const DomainName& domain, const Attribute& attribute);
  const Lexicon& global_lexicon();

  const Database& db_;
  LexiconTaggerOptions options_;
  std::map<std::pair<DomainName, Attribute>, Lexicon> lexicons_;
  std::optional<Lexicon> global_;
};

TagSequence baseline_tag(const Dialogue& dialogue, int turn, const Instruction& instruction, const Database& db);

}  // namespace magdial
