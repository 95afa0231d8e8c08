#include "magdial/goal_sampler.hpp"

#include <algorithm>
#include <set>

#include "magdial/error.hpp"
#include "magdial/rng.hpp"

namespace magdial {

void to_json(Json& j, const GoalConfig& v) {
  j = Json{{"domain_count_weights", v.domain_count_weights},
           {"max_domains", v.max_domains},
           {"domains", v.domains},
           {"min_constraints", v.min_constraints},
           {"max_constraints", v.max_constraints},
           {"min_requests", v.min_requests},
           {"max_requests", v.max_requests},
           {"booking_probability", v.booking_probability},
           {"edit_probability", v.edit_probability},
           {"request_only", v.request_only},
           {"never_sampled", v.never_sampled},
           {"taxi_requires_route", v.taxi_requires_route},
           {"train_requires_day_and_route", v.train_requires_day_and_route}};
}

void from_json(const Json& j, GoalConfig& v) {
  GoalConfig d;
  v.domain_count_weights = j.value("domain_count_weights", d.domain_count_weights);
  v.max_domains = j.value("max_domains", d.max_domains);
  v.domains = j.value("domains", d.domains);
  v.min_constraints = j.value("min_constraints", d.min_constraints);
  v.max_constraints = j.value("max_constraints", d.max_constraints);
  v.min_requests = j.value("min_requests", d.min_requests);
  v.max_requests = j.value("max_requests", d.max_requests);
  v.booking_probability = j.value("booking_probability", d.booking_probability);
  v.edit_probability = j.value("edit_probability", d.edit_probability);
  v.request_only = j.value("request_only", d.request_only);
  v.never_sampled = j.value("never_sampled", d.never_sampled);
  v.taxi_requires_route = j.value("taxi_requires_route", d.taxi_requires_route);
  v.train_requires_day_and_route = j.value("train_requires_day_and_route", d.train_requires_day_and_route);
}

void to_json(Json& j, const Checklist& v) { j = Json{{"check", v.check}, {"fill", v.fill}}; }

DomainCapabilities capabilities(const Database& db, const DomainName& domain) {
  DomainCapabilities c;
  for (const auto& a : db.apis) {
    if (a.domain != domain) continue;
    if (a.operation == Operation::find) {
      if (a.name == domain + "_lookup") {
        c.requestable = a.outputs;
      } else if (a.inputs.size() == 1) {
        c.searchable.push_back(a.inputs.front().attribute);
      }
    } else if (a.operation == Operation::add) {
      c.bookable = true;
      for (const auto& in : a.inputs) {
        if (in.attribute != "name" && in.attribute != "id") c.booking.push_back(in.attribute);
      }
      c.booking_outputs = a.outputs;
    } else if (a.operation == Operation::edit) {
      c.editable.push_back(a.inputs.back().attribute);
    } else {
      c.cancellable = true;
    }
  }
  return c;
}

namespace {

bool contains(const std::vector<Attribute>& v, const Attribute& a) { return std::find(v.begin(), v.end(), a) != v.end(); }

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) { return hi <= lo ? lo : lo + rng.below(hi - lo + 1); }

void add_constraint(UserGoal& g, std::vector<Attribute>& used, const DomainName& d, const Attribute& a,
                    std::string value) {
  g.constraints.push_back({d, a, std::move(value)});
  used.push_back(a);
}

std::string pick_value(Rng& rng, const Database& db, const DomainName& d, const Attribute& a) {
  auto values = db.values(d, a);
  if (values.empty()) throw Error(Error::Kind::config, "no values for " + d + "." + a);
  return values[rng.below(values.size())];
}

void sample_domain(UserGoal& g, const Database& db, const DomainSchema& schema, Rng& rng, const GoalConfig& cfg) {
  const auto& d = schema.name;
  auto caps = capabilities(db, d);
  std::vector<Attribute> used;
  auto allowed = [&](const Attribute& a) { return !cfg.request_only.count(a) && !cfg.never_sampled.count(a); };

  if (!schema.entity_less) {
    const auto& entities = db.entities_of(d);
    if (entities.empty()) throw Error(Error::Kind::config, d + " has no entities");
    const auto& source = entities[rng.below(entities.size())];
    std::vector<Attribute> searchable;
    for (const auto& a : caps.searchable) {
      if (allowed(a) && source.get(a)) searchable.push_back(a);
    }
    std::vector<Attribute> chosen;
    const bool train_rule = cfg.train_requires_day_and_route && d == "train" && contains(searchable, "day") &&
                            contains(searchable, "departure") && contains(searchable, "destination") &&
                            contains(searchable, "leave") && contains(searchable, "arrive");
    if (train_rule) {
      chosen = {"departure", "destination", "day", rng.chance(0.5) ? "leave" : "arrive"};
    } else {
      if (cfg.min_constraints == 0) throw Error(Error::Kind::config, "min_constraints must be at least 1");
      if (cfg.min_constraints > searchable.size()) {
        throw Error(Error::Kind::config, d + ": " + std::to_string(cfg.min_constraints) +
                                             " constraints requested, only " + std::to_string(searchable.size()) +
                                             " searchable attributes");
      }
      auto k = std::min(between(rng, cfg.min_constraints, std::max(cfg.min_constraints, cfg.max_constraints)),
                        searchable.size());
      auto pool = searchable;
      rng.shuffle(pool);
      pool.resize(k);
      for (const auto& a : searchable) {
        if (contains(pool, a)) chosen.push_back(a);
      }
    }
    for (const auto& a : searchable) {
      if (contains(chosen, a)) add_constraint(g, used, d, a, *source.get(a));
    }

    std::vector<Attribute> requestable;
    for (const auto& a : caps.requestable) {
      if (!cfg.never_sampled.count(a) && !contains(used, a)) requestable.push_back(a);
    }
    auto r = std::min(between(rng, cfg.min_requests, std::max(cfg.min_requests, cfg.max_requests)),
                      requestable.size());
    rng.shuffle(requestable);
    requestable.resize(r);
    for (const auto& a : schema.attributes) {
      if (contains(requestable, a)) g.requests.push_back({d, a});
    }

    if (caps.bookable && rng.chance(cfg.booking_probability)) {
      for (const auto& a : caps.booking) {
        if (!contains(used, a)) add_constraint(g, used, d, a, pick_value(rng, db, d, a));
      }
      for (const auto& a : caps.editable) {
        if (!contains(used, a) && rng.chance(cfg.edit_probability)) add_constraint(g, used, d, a, pick_value(rng, db, d, a));
      }
      if (schema.has("reference num.") && !contains(used, "reference num.")) g.requests.push_back({d, "reference num."});
    }
    return;
  }

  // Entity-less domains are booking-only.
  std::vector<Attribute> booking = caps.booking;
  if (!cfg.taxi_requires_route) {
    rng.shuffle(booking);
    booking.resize(std::max<std::size_t>(1, rng.below(booking.size() + 1)));
  }
  std::set<std::string> taken;
  for (const auto& a : caps.booking) {
    if (!contains(booking, a)) continue;
    std::string value;
    for (int tries = 0; tries < 20; ++tries) {
      value = pick_value(rng, db, d, a);
      if (!taken.count(value)) break;
    }
    taken.insert(value);
    add_constraint(g, used, d, a, value);
  }
  for (const auto& a : caps.editable) {
    if (!contains(used, a) && rng.chance(cfg.edit_probability)) add_constraint(g, used, d, a, pick_value(rng, db, d, a));
  }
  std::vector<Attribute> outputs;
  for (const auto& a : caps.booking_outputs) {
    if (!cfg.never_sampled.count(a) && !contains(used, a)) outputs.push_back(a);
  }
  auto r = std::min(between(rng, cfg.min_requests, std::max(cfg.min_requests, cfg.max_requests)), outputs.size());
  rng.shuffle(outputs);
  outputs.resize(r);
  for (const auto& a : schema.attributes) {
    if (contains(outputs, a)) g.requests.push_back({d, a});
  }
}

}  // namespace

UserGoal sample_goal(const Database& db, std::uint64_t seed, const GoalConfig& config) {
  if (config.max_domains == 0 || config.max_domains > kMaxGoalDomains) {
    throw Error(Error::Kind::config, "max_domains must be in [1, 4]");
  }
  std::vector<const DomainSchema*> pool;
  for (const auto& s : db.domains) {
    bool listed = config.domains.empty() ||
                  std::find(config.domains.begin(), config.domains.end(), s.name) != config.domains.end();
    bool usable = s.entity_less || !db.entities_of(s.name).empty();
    if (listed && usable) pool.push_back(&s);
  }
  if (pool.empty()) throw Error(Error::Kind::config, "no usable domain");
  auto limit = std::min({config.max_domains, pool.size(), config.domain_count_weights.size()});
  if (limit == 0) throw Error(Error::Kind::config, "domain_count_weights is empty");
  std::vector<double> weights(config.domain_count_weights.begin(),
                              config.domain_count_weights.begin() + static_cast<std::ptrdiff_t>(limit));
  Rng rng(seed);
  auto n = rng.weighted(weights) + 1;
  rng.shuffle(pool);
  pool.resize(n);

  UserGoal g;
  for (const auto* s : pool) {
    g.domains.push_back(s->name);
    sample_domain(g, db, *s, rng, config);
  }
  return g;
}

std::vector<UserGoal> sample_goals(const Database& db, std::uint64_t seed, std::size_t count,
                                   const GoalConfig& config) {
  std::vector<UserGoal> out;
  std::set<std::string> seen;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts > count * 50 + 100) {
      throw Error(Error::Kind::generation, "only " + std::to_string(out.size()) + " distinct goals after " +
                                               std::to_string(attempts) + " attempts");
    }
    auto g = sample_goal(db, Rng::derive(seed, "goal/" + std::to_string(attempts++)), config);
    if (!seen.insert(Json(g).dump()).second) continue;
    std::string id = std::to_string(out.size());
    g.id = "g" + std::string(id.size() < 4 ? 4 - id.size() : 0, '0') + id;
    out.push_back(std::move(g));
  }
  return out;
}

RenderedGoal render_goal(const UserGoal& goal) {
  RenderedGoal r;
  r.checklist.check = goal.constraints;
  r.checklist.fill = goal.requests;
  std::string& text = r.description;
  text = "Your task involves " + std::to_string(goal.domains.size()) +
         (goal.domains.size() == 1 ? " domain." : " domains.");
  for (const auto& d : goal.domains) {
    text += "\n" + d + ":";
    std::vector<std::string> cs, rs;
    for (const auto& c : goal.constraints) {
      if (c.domain == d) cs.push_back(c.attribute + " is " + c.value);
    }
    for (const auto& q : goal.requests) {
      if (q.domain == d) rs.push_back(q.attribute);
    }
    if (!cs.empty()) {
      text += " you want one where";
      for (std::size_t i = 0; i < cs.size(); ++i) text += (i ? ", " : " ") + cs[i];
      text += ".";
    }
    if (!rs.empty()) {
      text += " Ask for the";
      for (std::size_t i = 0; i < rs.size(); ++i) text += (i ? ", " : " ") + rs[i];
      text += ".";
    }
  }
  for (const auto& c : goal.constraints) r.table += "check\t" + c.domain + "\t" + c.attribute + "\t" + c.value + "\n";
  for (const auto& q : goal.requests) r.table += "fill\t" + q.domain + "\t" + q.attribute + "\n";
  return r;
}

Checklist parse_checklist(std::string_view table) {
  Checklist c;
  std::size_t offset = 0;
  while (offset < table.size()) {
    auto nl = table.find('\n', offset);
    auto line = table.substr(offset, nl == std::string_view::npos ? std::string_view::npos : nl - offset);
    if (!line.empty()) {
      std::vector<std::string> cols;
      std::size_t p = 0;
      while (true) {
        auto tab = line.find('\t', p);
        cols.emplace_back(line.substr(p, tab == std::string_view::npos ? std::string_view::npos : tab - p));
        if (tab == std::string_view::npos) break;
        p = tab + 1;
      }
      if (cols[0] == "check" && cols.size() == 4) {
        c.check.push_back({cols[1], cols[2], cols[3]});
      } else if (cols[0] == "fill" && cols.size() == 3) {
        c.fill.push_back({cols[1], cols[2]});
      } else {
        throw ParseError(offset, "malformed checklist line");
      }
    }
    if (nl == std::string_view::npos) break;
    offset = nl + 1;
  }
  return c;
}

}  // namespace magdial
