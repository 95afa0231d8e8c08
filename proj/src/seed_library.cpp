#include <algorithm>
#include <cctype>

#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/world.hpp"

namespace magdial {

std::string family_name(const FamilyKey& key) {
  std::string out = key.domain + "." + key.kind;
  for (std::size_t i = 0; i < key.attributes.size(); ++i) out += (i ? "+" : ".") + slug(key.attributes[i]);
  if (key.style > 0) out += "#" + std::to_string(key.style);
  return out;
}

FamilyKey parse_family(std::string_view family, const Database& db) {
  FamilyKey key;
  std::string_view rest = family;
  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    key.style = std::stoi(std::string(rest.substr(hash + 1)));
    rest = rest.substr(0, hash);
  }
  auto dot = rest.find('.');
  if (dot == std::string_view::npos) throw Error(Error::Kind::schema, "malformed family '" + std::string(family) + "'");
  key.domain = std::string(rest.substr(0, dot));
  rest = rest.substr(dot + 1);
  dot = rest.find('.');
  key.kind = std::string(rest.substr(0, dot));
  if (dot == std::string_view::npos) return key;
  rest = rest.substr(dot + 1);
  while (!rest.empty()) {
    auto plus = rest.find('+');
    std::string part(rest.substr(0, plus));
    auto it = std::find_if(db.registry.begin(), db.registry.end(), [&](const auto& a) { return slug(a) == part; });
    if (it == db.registry.end()) throw Error(Error::Kind::schema, "unknown attribute slug '" + part + "'");
    key.attributes.push_back(*it);
    if (plus == std::string_view::npos) break;
    rest = rest.substr(plus + 1);
  }
  return key;
}

std::string reply_template(std::string_view solution) {
  auto open = solution.find('"');
  if (open == std::string_view::npos) return {};
  auto close = solution.find('"', open + 1);
  if (close == std::string_view::npos) return {};
  return std::string(solution.substr(open + 1, close - open - 1));
}

namespace {

using Phrases = std::vector<std::string>;

const Phrases kOpeners = {"If ",          "When ",     "In case ",       "Whenever ",        "Once ",
                          "Should it happen that ",    "As soon as ",    "At the point where ",
                          "Given that ", "Suppose ",   "Where ",         "Any time ",        "Provided that ",
                          "For dialogues in which "};
const Phrases kSubjects = {"the user",     "the customer",          "the caller",     "the guest",
                           "a client",     "the traveler",          "the person you are helping",
                           "your visitor", "the speaker",           "the one chatting with you",
                           "the tourist",  "the patron",            "someone on the line", "the individual you serve"};
const Phrases kExampleMarkers = {"e.g.", "for example", "such as", "like", "for instance", "say", "as in"};
const Phrases kClosings = {"Keep it brief.",      "Stay friendly.",   "Use a warm voice.",   "Be concise.",
                           "Sound confident.",    "Avoid jargon.",    "Remain courteous.",   "Speak clearly.",
                           "Keep a calm manner.", "Be direct.",       "Show patience.",      "Keep the reply natural.",
                           "Be cheerful.",        "Stay professional."};

const std::map<DomainName, Phrases>& domain_words() {
  static const std::map<DomainName, Phrases> w = {
      {"attraction", {"attraction", "place to visit", "sight", "tourist spot"}},
      {"hospital", {"hospital", "medical facility", "health facility"}},
      {"hotel", {"hotel", "place to stay", "accommodation", "lodging"}},
      {"restaurant", {"restaurant", "place to eat", "dining place", "eatery"}},
      {"train", {"train", "rail service", "train ride", "railway trip"}},
      {"taxi", {"taxi", "cab", "car ride", "ride"}},
  };
  return w;
}

std::string pick(const Phrases& p, std::size_t v) { return p[v % p.size()]; }

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool starts_with_vowel(std::string_view s) {
  return !s.empty() && std::string_view("aeiouAEIOU").find(s.front()) != std::string_view::npos;
}

// "a" before a vowel-initial word, or before a mention placeholder whose
// surface word for this set is vowel-initial, becomes "an".
std::string fix_articles(const std::string& s, std::size_t v) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool word_a = (s[i] == 'a' || s[i] == 'A') && (i == 0 || s[i - 1] == ' ') && i + 2 < s.size() && s[i + 1] == ' ';
    if (word_a) {
      std::string_view next(s.data() + i + 2, s.size() - i - 2);
      bool vowel = starts_with_vowel(next);
      if (!next.empty() && next.front() == '<') {
        auto close = next.find('>');
        auto bar = next.find('|');
        std::string attr(next.substr(1, std::min(close, bar) - 1));
        vowel = starts_with_vowel(mention_word(attr, v));
      }
      out.push_back(s[i]);
      if (vowel) out.push_back('n');
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// "<a>" or "<a> and <b>" with a connector chosen per set.
std::string mentions_phrase(const std::vector<Attribute>& attrs, std::size_t v, bool article) {
  static const Phrases connectors = {" and ", " plus ", " together with ", " along with "};
  std::string out;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out += pick(connectors, v + i);
    if (article) out += "the ";
    out += "<" + attrs[i] + ">";
  }
  return out;
}

struct KindText {
  Phrases situations;  // {dom} and {m} are substituted
  Phrases prose;
  Phrases replies;
};

const std::map<std::string, KindText>& kind_texts() {
  static const std::map<std::string, KindText> t = {
      {"search",
       {{"asks for a {dom} and states the {m}", "is looking for a {dom} with a specific {m}",
         "wants you to find a {dom}, giving the {m}", "mentions a preferred {m} for the {dom}",
         "specifies the {m} of the {dom} they need", "describes the {m} wanted for a {dom}",
         "requests {dom} options matching a given {m}"},
        {}, {}}},
      {"info",
       {{"asks for the {m} of the {dom} you suggested", "wants to know the {m} of that {dom}",
         "requests the {m} of the recommended {dom}", "inquires about the {m} of the {dom} mentioned",
         "needs the {m} of the chosen {dom}", "would like to hear the {m} of this {dom}",
         "is curious about the {m} of the proposed {dom}"},
        {"Look it up and tell the user the {m}", "Read the {m} from the result and share it",
         "Report the {m} found in the record", "Give the {m} returned by the lookup",
         "Answer with the {m} of that entry", "Provide the {m} to the user", "Reply with the {m} listed for it"},
        {"The {m} of {name} is {R}.", "{name} has the {m} {R}.", "For {name}, the {m} is {R}.",
         "You can note down {R} as the {m} of {name}.", "{R} is the {m} of {name}.",
         "Sure, {name} lists {R} as its {m}.", "The record says {name}: {m} {R}."}}},
      {"book",
       {{"wants to book the {dom} and gives the {m}", "asks you to reserve the {dom} with the {m}",
         "decides to make a {dom} reservation, naming the {m}", "requests a booking of the {dom} for the {m}",
         "confirms the {dom} and provides the {m} for a reservation", "would like the {dom} booked using the {m}",
         "says to go ahead and reserve the {dom} with the {m}"},
        {"Make the reservation and give the reference number", "Confirm the booking and share its reference",
         "Book it and read out the reservation code", "Complete the booking and report the reference",
         "Place the reservation, then pass on the code", "Finish the booking and state the reference",
         "Reserve it and let them know the reference"},
        {"Done! Your reference number is {reference num.}.", "It is booked. The reference number is {reference num.}.",
         "Booking confirmed with reference {reference num.}.", "All set, please keep the reference {reference num.}.",
         "Your reservation went through: {reference num.}.", "I have reserved it under reference {reference num.}.",
         "Success, the booking reference is {reference num.}."}}},
      {"update",
       {{"wants to change the {m} of an existing {dom} booking", "asks to modify the {m} on the {dom} reservation",
         "gives a new {m} for the booked {dom}", "needs a different {m} for the {dom} reservation",
         "corrects the {m} of the {dom} booking", "requests that the {dom} booking use another {m}",
         "updates the {m} for the {dom} they reserved"},
        {"Apply the change and confirm it", "Update the booking and acknowledge the new value",
         "Modify the reservation and repeat the new setting", "Change the record and confirm the update",
         "Edit the booking and tell them it worked", "Save the new value and confirm",
         "Adjust the reservation and report back"},
        {"I changed the {mb} to {B}. The reference {reference num.} still applies.",
         "The {mb} is now {B} for booking {reference num.}.", "Updated: {mb} {B}, reference {reference num.}.",
         "Your booking {reference num.} now has {mb} {B}.", "Done, the {mb} was switched to {B} for {reference num.}.",
         "Booking {reference num.} was modified so the {mb} is {B}.",
         "The new {mb}, {B}, is saved under {reference num.}."}}},
      {"cancel",
       {{"wants to cancel the {dom} booking", "asks you to call off the {dom} reservation",
         "no longer needs the booked {dom}", "decides to drop the {dom} reservation",
         "requests cancellation of the {dom} they reserved", "changes their mind about the {dom} booking",
         "tells you the {dom} reservation should be withdrawn"},
        {"Cancel it and confirm", "Withdraw the booking and acknowledge", "Call off the reservation and say so",
         "Remove the booking and confirm the cancellation", "Void the reservation and report it",
         "Cancel the reservation and tell them", "Drop the booking and confirm"},
        {"Booking {reference num.} has been cancelled.", "I cancelled reservation {reference num.}.",
         "Reference {reference num.} is no longer active.", "The booking {reference num.} is now void.",
         "Cancellation done for {reference num.}.", "{reference num.} was cancelled as requested.",
         "Your reservation {reference num.} has been dropped."}}},
      {"ask",
       {{"has not said which {m} they prefer for the {dom}", "leaves the {m} of the {dom} open",
         "gives no {m} for the {dom} yet", "is vague about the {m} of the {dom}",
         "forgot to mention a {m} for the {dom}", "did not specify the {m} of the {dom}",
         "seems undecided on the {m} of the {dom}"},
        {"Ask them about it", "Ask which one they want", "Politely ask for a preference", "Request that detail",
         "Ask a short question about it", "Prompt them for it", "Check their preference"},
        {"Do you have a preferred {m}?", "Which {m} would you like?", "Any preference on the {m}?",
         "What {m} are you looking for?", "Could you tell me the {m} you want?", "Is there a particular {m} in mind?",
         "What about the {m}?"}}},
      {"more",
       {{"has received what they asked for about the {dom}", "seems satisfied with the {dom} information",
         "got the {dom} details they wanted", "has everything needed for the {dom}",
         "received an answer about the {dom}", "is done with the {dom} part",
         "has no open question on the {dom}"},
        {"Offer further help", "Ask whether anything else is needed", "Check if more help is wanted",
         "Offer to help with something else", "See if they need anything more", "Ask if that is all",
         "Propose more assistance"},
        {"Is there anything else I can help you with?", "Anything else you need?", "Can I help with something else?",
         "What else can I do for you?", "Do you need anything more?", "Is that all for today?",
         "Shall I look up anything else?"}}},
      {"nores",
       {{"finds that no {dom} has the requested {m}", "hears there is no {dom} with that {m}",
         "gets no {dom} matching the {m}", "learns the {m} they named yields no {dom}",
         "is told the {dom} search on {m} came back empty", "receives zero {dom} hits for that {m}",
         "faces an empty {dom} list for the {m}"},
        {"Apologize and suggest relaxing it", "Say sorry and propose another option",
         "Express regret and offer alternatives", "Admit the miss and invite a change",
         "Regret the outcome and ask for flexibility", "Acknowledge the gap and offer a new try",
         "Console them and recommend widening the search"},
        {"Sorry, nothing matches. Would you like to try another?", "Unfortunately no result came up. Shall we change it?",
         "I could not find a match. Maybe a different one?", "That gave no hits, sadly. Any other wish?",
         "My apologies, the list is empty. Could we adjust?", "Nothing turned up, I am afraid. Want to loosen it?",
         "No luck this time. Shall I try something close?"}}},
      {"unsure",
       {{"is unsure which {m} to choose for the {dom}", "hesitates between options of {m} for the {dom}",
         "asks for advice on the {m} of the {dom}", "cannot decide on a {m} for the {dom}",
         "wavers about what {dom} {m} would suit them", "seeks guidance in picking a {dom} {m}",
         "is torn over the {m} of the {dom}"},
        {"Offer to list choices", "Propose a few options", "Help them decide", "Suggest narrowing down together",
         "Volunteer some guidance", "Present a handful of possibilities", "Support the decision gently"},
        {"I can list a few options if you like.", "Let me name some common choices.",
         "Would a short list help?", "Shall I walk you through the popular picks?",
         "Many guests go with a typical one; want to hear it?", "We can decide together, step by step.",
         "I am happy to narrow it down for you."}}},
      {"compare",
       {{"wants to compare {dom} options by {m}", "asks how the {dom} candidates differ in {m}",
         "needs the {m} of several {dom} options side by side", "weighs two {dom} choices on their {m}",
         "asks which {dom} is better in terms of {m}", "wants a contrast of the {m} across {dom} results",
         "looks for differences in {dom} {m}"},
        {"Offer a comparison", "Propose to compare them", "Explain the differences", "Lay out a contrast",
         "Describe how they stack up", "Put them next to each other", "Point out what sets them apart"},
        {"I can compare them for you.", "Let me contrast the options.", "Here is how they differ.",
         "Side by side, they are not that far apart.", "One of them is a closer fit, I think.",
         "Both are fine, yet each has its strength.", "Let me line them up so you can judge."}}},
      {"confirm",
       {{"asks you to confirm the {m} of the {dom}", "double-checks the {m} of the {dom}",
         "wants reassurance about the {m} of the {dom}", "repeats the {dom} {m} to be certain",
         "seeks verification of the {dom} {m}", "asks whether the {m} of the {dom} is correct",
         "wants the {dom} {m} checked again"},
        {"Reassure them", "Confirm politely", "Repeat the detail", "Verify and affirm", "Settle their doubt",
         "State that it is right", "Give a clear confirmation"},
        {"Let me double-check that for you.", "Yes, I will verify it.", "I can confirm it once more.",
         "That is correct as far as I can see.", "Right, nothing has changed there.",
         "Confirmed, you are all good.", "Yes, that detail stands."}}},
      {"explain",
       {{"asks what the {m} of a {dom} means", "is confused by the {m} of the {dom}",
         "wants the {m} of the {dom} explained", "does not understand the {dom} term {m}",
         "asks for a definition of {dom} {m}", "wonders why the {m} of a {dom} matters",
         "requests clarification about the {dom} {m}"},
        {"Explain briefly", "Clarify the term", "Give a short explanation", "Define it plainly",
         "Describe its meaning", "Offer a simple account", "Unpack the notion"},
        {"It describes the option in more detail.", "We use it as one property of each entry.",
         "It is simply a detail worth knowing.", "Think of it as a label that helps you choose.",
         "It tells you a bit more before deciding.", "That field summarizes one aspect.",
         "It is a descriptor we keep for every listing."}}},
  };
  return t;
}

const Phrases kSearchProse[3] = {
    {},
    {"Report how many matches there are and recommend one of them", "Say how many options were found and suggest one",
     "Give the number of results and propose a single pick", "Mention the match count and name your favourite",
     "State the number found and put forward one option", "Share the count of candidates and highlight one",
     "Tell them the total and point out one good choice"},
    {"Give an overview with the count and one example", "Summarize the results with their number and an example",
     "List the total and mention one as an illustration", "Describe how many exist and cite one",
     "Outline the count of matches and one instance", "Sum up the findings with the number and a sample",
     "Present the total and one representative"},
};
const Phrases kSearchReplies[3] = {
    {},
    {"I found {choice} options. {name} is a nice one.", "There are {choice} matches, and I would suggest {name}.",
     "{choice} results came up. How about {name}?", "Out of {choice} candidates, {name} stands out.",
     "We have {choice} that fit; {name} is worth a try.", "My search returned {choice}. I recommend {name}.",
     "Among {choice} choices, {name} looks good."},
    {"We have {choice} of them, for example {name}.", "{name} is one of {choice} options that fit.",
     "There are {choice} in total, such as {name}.", "{choice} fit the request, including {name}.",
     "Our list has {choice}; one of them is {name}.", "Overall {choice} are available, {name} among them.",
     "You can pick from {choice}, like {name}."},
};
const Phrases kSearchTails[3] = {
    {},
    {" and wants a suggestion", " and expects a recommendation", " and would like you to pick one",
     " and hopes for a single proposal", " and waits for your advice", " and asks what you would choose",
     " and wants your favourite"},
    {" and wants an overview", " and asks what is available", " and wants to know how many exist",
     " and asks for a summary of options", " and wants the range of choices", " and asks about the total",
     " and wants a broad picture"},
};
const Phrases kFillerTails = {"", " once more", " while in a hurry", " in a polite tone"};

const Phrases kApiFrames = {
    "Call {api} with {args}.",         "Use the {api} API, passing {args}.",  "Invoke {api} using {args} as input.",
    "Query {api} filled with {args}.", "Send a {api} request that carries {args}.", "Run {api} and supply {args}.",
    "Trigger {api}, providing {args}.", "Fire the {api} endpoint on {args}.", "Make a call to {api} given {args}.",
    "Execute {api} taking {args}.",    "Request {api} and hand over {args}.", "Issue {api} with arguments {args}.",
    "Hit {api} by sending {args}.",    "Pass {args} to {api}."};

struct DomainApis {
  std::vector<Attribute> searchable;
  std::vector<const ApiSpec*> finds;
  const ApiSpec* lookup = nullptr;
  const ApiSpec* booking = nullptr;
  std::vector<const ApiSpec*> updates;
  const ApiSpec* cancel = nullptr;
};

DomainApis domain_apis(const Database& db, const DomainName& d) {
  DomainApis out;
  for (const auto& a : db.apis) {
    if (a.domain != d) continue;
    if (a.name == d + "_lookup") {
      out.lookup = &a;
    } else if (a.operation == Operation::find) {
      out.finds.push_back(&a);
      if (a.inputs.size() == 1) out.searchable.push_back(a.inputs[0].attribute);
    } else if (a.operation == Operation::add) {
      out.booking = &a;
    } else if (a.operation == Operation::edit) {
      out.updates.push_back(&a);
    } else {
      out.cancel = &a;
    }
  }
  return out;
}

struct Plan {
  FamilyKey key;
  const ApiSpec* api = nullptr;
};

SeedVariant make_variant(const Plan& plan, const Database& db, std::size_t v) {
  const auto& key = plan.key;
  const auto& dom = pick(domain_words().at(key.domain), v);
  const bool filler = kind_texts().count(key.kind) && key.kind != "search" && key.kind != "info" &&
                      key.kind != "book" && key.kind != "update" && key.kind != "cancel" && key.kind != "ask" &&
                      key.kind != "more";
  const auto& kt = kind_texts().at(key.kind);

  // Attributes named in the condition.
  std::vector<Attribute> cond_attrs = key.attributes;
  if (key.kind == "book" && plan.api) {
    cond_attrs.clear();
    for (const auto& in : plan.api->inputs) {
      if (in.attribute != "name" && in.attribute != "id") cond_attrs.push_back(in.attribute);
    }
    if (cond_attrs.empty()) cond_attrs.push_back(plan.api->inputs.front().attribute);
  }

  SeedVariant out;
  std::string situation = replace_all(pick(kt.situations, v + key.style), "{dom}", dom);
  situation = replace_all(situation, "{m}", mentions_phrase(cond_attrs, v, false));
  std::string tail;
  if (key.kind == "search") tail = pick(kSearchTails[key.style], v);
  if (filler) tail = kFillerTails[static_cast<std::size_t>(key.style) % kFillerTails.size()];
  out.condition = capitalize(pick(kOpeners, v) + pick(kSubjects, v) + " " + situation + tail + ".");

  std::string prose, reply;
  if (key.kind == "search") {
    prose = pick(kSearchProse[key.style], v);
    reply = pick(kSearchReplies[key.style], v);
  } else {
    prose = pick(kt.prose, v);
    reply = pick(kt.replies, v + static_cast<std::size_t>(key.style));
  }
  const Attribute first = key.attributes.empty() ? Attribute() : key.attributes.front();
  auto fill = [&](std::string s) {
    s = replace_all(s, "{dom}", dom);
    if (!first.empty()) {
      s = replace_all(s, "{mb}", "<" + first + ">");
      s = replace_all(s, "{m}", "<" + first + ">");
      s = replace_all(s, "{R}", "{" + first + "}");
      s = replace_all(s, "{B}", "{" + first + "}");
    }
    return s;
  };
  prose = fill(prose);
  reply = fill(reply);
  if (key.kind == "book" && plan.api) {
    const auto& outs = plan.api->outputs;
    if (std::find(outs.begin(), outs.end(), "car") != outs.end()) reply = "A {car} is arranged. " + reply;
  }
  out.solution = prose + ", " + pick(kExampleMarkers, v) + " \"" + reply + "\". " + pick(kClosings, v);

  if (plan.api) {
    std::vector<Attribute> inputs;
    for (const auto& in : plan.api->inputs) inputs.push_back(in.attribute);
    out.api_description = replace_all(pick(kApiFrames, v), "{api}", plan.api->name);
    out.api_description = replace_all(out.api_description, "{args}", mentions_phrase(inputs, v, true));
  }
  (void)db;
  out.condition = fix_articles(out.condition, v);
  out.solution = fix_articles(out.solution, v);
  out.api_description = fix_articles(out.api_description, v);
  return out;
}

std::vector<Plan> domain_plans(const Database& db, const DomainName& d, std::size_t target) {
  auto apis = domain_apis(db, d);
  std::vector<Plan> core;
  for (int style = 1; style <= 2; ++style) {
    for (const auto* f : apis.finds) {
      FamilyKey k{d, "search", {}, style};
      for (const auto& in : f->inputs) k.attributes.push_back(in.attribute);
      core.push_back({k, f});
    }
  }
  if (apis.lookup) {
    for (const auto& r : apis.lookup->outputs) {
      if (r == "name" || r == "choice") continue;
      core.push_back({{d, "info", {r}, 0}, apis.lookup});
    }
  }
  if (apis.booking) core.push_back({{d, "book", {}, 0}, apis.booking});
  for (const auto* u : apis.updates) core.push_back({{d, "update", {u->inputs.back().attribute}, 0}, u});
  if (apis.cancel) core.push_back({{d, "cancel", {}, 0}, apis.cancel});
  for (const auto& a : apis.searchable) core.push_back({{d, "ask", {a}, 0}, nullptr});
  core.push_back({{d, "more", {}, 0}, nullptr});

  if (core.size() > target) {
    throw Error(Error::Kind::config, d + ": " + std::to_string(core.size()) + " core families exceed the target of " +
                                         std::to_string(target));
  }
  const auto* schema = db.domain(d);
  static const Phrases fillers = {"nores", "unsure", "compare", "confirm", "explain"};
  for (int style = 0; core.size() < target && style < static_cast<int>(kFillerTails.size()); ++style) {
    for (const auto& a : schema->attributes) {
      for (const auto& f : fillers) {
        if (core.size() >= target) break;
        core.push_back({{d, f, {a}, style}, nullptr});
      }
      if (core.size() >= target) break;
    }
  }
  if (core.size() < target) {
    throw Error(Error::Kind::config, d + ": cannot enumerate " + std::to_string(target) + " families");
  }
  return core;
}

}  // namespace

std::vector<SeedInstruction> seed_library(const Database& db, const SeedLibraryOptions& options) {
  auto counts = options.family_counts.empty() ? default_instruction_counts() : options.family_counts;
  std::vector<SeedInstruction> out;
  for (const auto& schema : db.domains) {
    auto it = counts.find(schema.name);
    if (it == counts.end() || it->second == 0) continue;
    for (const auto& plan : domain_plans(db, schema.name, it->second)) {
      SeedInstruction seed;
      seed.family = family_name(plan.key);
      seed.domain = schema.name;
      if (plan.api) seed.api = plan.api->name;
      for (std::size_t v = 0; v < options.paraphrase_sets; ++v) seed.variants.push_back(make_variant(plan, db, v));
      out.push_back(std::move(seed));
    }
  }
  return out;
}

}  // namespace magdial
