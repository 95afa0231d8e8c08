#pragma once

// Manual construction from seed instructions, paraphrase diversity checks and
// the bundled seed library.
//
// Seed template syntax (condition, api description and solution):
//   <attr>          attribute mention, rendered with the paraphrase set's word
//   <attr|surface>  attribute mention with an explicit surface form
//   {attr}          result placeholder, left in place for the responder
// Mentions inside the api description become Instruction::api mentions and
// must match the API inputs in number and order.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magdial/model.hpp"
#include "magdial/serialize.hpp"

namespace magdial {

struct SeedVariant {
  std::string condition;
  std::string api_description;
  std::string solution;
  bool operator==(const SeedVariant&) const = default;
};

struct SeedInstruction {
  std::string family;
  DomainName domain;
  std::optional<std::string> api;
  // One entry per paraphrase set.
  std::vector<SeedVariant> variants;
  bool operator==(const SeedInstruction&) const = default;
};

void to_json(Json& j, const SeedVariant& v);
void from_json(const Json& j, SeedVariant& v);
void to_json(Json& j, const SeedInstruction& v);
void from_json(const Json& j, SeedInstruction& v);

// Surface words for attribute mentions; the paraphrase set picks one.
const std::vector<std::string>& mention_words(const Attribute& attribute);
std::string mention_word(const Attribute& attribute, std::size_t paraphrase_set);

std::string manual_id(std::size_t paraphrase_set);
std::string slug(std::string_view s);

// Throws Error(compile) on mention/input arity or order mismatch, unknown API,
// or a paraphrase set without a variant.
Manual compile_manual(const std::vector<SeedInstruction>& seeds, std::size_t paraphrase_set, const Database& db);

struct NgramOverlap {
  std::size_t hypothesis = 0;
  std::size_t reference = 0;
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double bleu = 0.0;
};

struct GateReport {
  double threshold = 0.8;
  double self_bleu = 0.0;
  std::vector<double> variant_scores;  // each variant against all others
  std::vector<NgramOverlap> pairs;     // every ordered pair i != j
  bool accepted = false;
};

void to_json(Json& j, const NgramOverlap& v);
void to_json(Json& j, const GateReport& v);

// Accepts iff the mean self-BLEU is below the threshold. Throws
// Error(argument) for fewer than two variants and Error(degenerate_input) for
// a variant without tokens.
GateReport paraphrase_gate(const std::vector<std::string>& variants, double threshold = 0.8);

// Family identifiers have the form "{domain}.{kind}[.{attr}[+{attr}]][#{style}]"
// with attributes slugged. Kinds of the bundled library: search, info, book,
// update, cancel, ask, more and the filler kinds nores, unsure, compare,
// confirm, explain.
struct FamilyKey {
  DomainName domain;
  std::string kind;
  std::vector<Attribute> attributes;
  int style = 0;
  bool operator==(const FamilyKey&) const = default;
};

std::string family_name(const FamilyKey& key);
// Attribute slugs are resolved against the database registry.
FamilyKey parse_family(std::string_view family, const Database& db);

// Text between the first pair of double quotes of a solution, empty if none.
std::string reply_template(std::string_view solution);

struct SeedLibraryOptions {
  std::size_t paraphrase_sets = 14;
  // Families per domain; defaults to default_instruction_counts().
  std::map<DomainName, std::size_t> family_counts;
};

std::vector<SeedInstruction> seed_library(const Database& db, const SeedLibraryOptions& options = {});

// Full instruction text of every variant of `seed`, compiled per set.
std::vector<std::string> variant_texts(const SeedInstruction& seed, const Database& db);

}  // namespace magdial
