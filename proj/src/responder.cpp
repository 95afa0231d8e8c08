#include "magdial/responder.hpp"

#include "magdial/error.hpp"
#include "magdial/manual_kit.hpp"
#include "magdial/rng.hpp"

namespace magdial {

std::string no_result_reply(const DomainName& domain) {
  return "Sorry, there is no " + domain + " matching your request.";
}

std::vector<Attribute> placeholders(std::string_view reply) {
  std::vector<Attribute> out;
  std::size_t p = 0;
  while ((p = reply.find('{', p)) != std::string_view::npos) {
    auto e = reply.find('}', p);
    if (e == std::string_view::npos) break;
    out.emplace_back(reply.substr(p + 1, e - p - 1));
    p = e + 1;
  }
  return out;
}

namespace {

struct Source {
  const ApiResult* result = nullptr;
  const Entity* entity = nullptr;
};

Source source_for(const Instruction& ins, const std::vector<ApiCall>& calls, const std::vector<ApiResult>& results,
                  Rng& rng) {
  Source s;
  for (std::size_t i = 0; i < calls.size() && i < results.size(); ++i) {
    if (calls[i].instruction && *calls[i].instruction == ins.id) s.result = &results[i];
  }
  if (s.result && s.result->operation == Operation::find && !s.result->entities.empty()) {
    const auto& es = s.result->entities;
    s.entity = s.result->count > 1 ? &es[rng.below(es.size())] : &es.front();
  }
  return s;
}

}  // namespace

Realization realize(const std::vector<const Instruction*>& selected, const std::vector<ApiCall>& calls,
                    const std::vector<ApiResult>& results, const CarryoverState& carryover, std::uint64_t seed) {
  Realization out;
  Rng rng(seed);
  for (const auto* ins : selected) {
    auto source = source_for(*ins, calls, results, rng);
    std::string reply;
    std::vector<ResponseValue> values;
    if (source.result && source.result->operation == Operation::find && source.result->count == 0) {
      reply = no_result_reply(ins->domain);
    } else {
      const auto tmpl = reply_template(ins->solution);
      std::size_t p = 0;
      while (p < tmpl.size()) {
        auto open = tmpl.find('{', p);
        auto close = open == std::string::npos ? std::string::npos : tmpl.find('}', open);
        if (close == std::string::npos) {
          reply.append(tmpl, p);
          break;
        }
        reply.append(tmpl, p, open - p);
        Attribute attr = tmpl.substr(open + 1, close - open - 1);
        const std::string* value = nullptr;
        std::string owned;
        if (source.result) {
          if (attr == "choice" && source.result->operation == Operation::find) {
            owned = std::to_string(source.result->count);
            value = &owned;
          } else if (source.entity) {
            value = source.entity->get(attr);
          } else if (auto it = source.result->values.find(attr); it != source.result->values.end()) {
            value = &it->second;
          }
        }
        if (!value) {
          auto d = carryover.domains.find(ins->domain);
          if (d != carryover.domains.end()) {
            if (auto it = d->second.find(attr); it != d->second.end()) value = &it->second;
          }
        }
        if (!value) throw Error(Error::Kind::realization, ins->id + ": no value for '" + attr + "'");
        reply += *value;
        values.push_back({ins->domain, attr, *value});
        p = close + 1;
      }
    }
    if (reply.empty()) continue;
    if (!out.text.empty()) out.text += ' ';
    out.text += reply;
    out.values.insert(out.values.end(), values.begin(), values.end());
  }
  return out;
}

}  // namespace magdial
