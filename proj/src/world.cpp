#include "magdial/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "magdial/error.hpp"
#include "magdial/rng.hpp"

namespace magdial {
namespace {

using Words = std::vector<std::string>;

const Words kAreas = {"north", "south", "east", "west", "center"};
const Words kPrices = {"cheap", "moderate", "expensive"};
const Words kAttractionPrices = {"free", "cheap", "expensive"};
const Words kHotelTypes = {"guesthouse", "boutique", "resort", "apartment", "courtyard"};
const Words kStars = {"2", "3", "4", "5"};
const Words kFacilities = {"free wifi", "parking", "swimming pool", "gym", "spa"};
const Words kFoods = {"Japanese", "Sichuan", "Cantonese", "Italian", "French", "Korean", "Thai", "Indian",
                      "Mexican", "Hunan", "vegetarian", "hotpot", "seafood", "Mongolian", "Spanish"};
const Words kAttractionTypes = {"museum", "theatre", "gallery", "temple", "palace",
                                "zoo",    "stadium", "aquarium", "monument", "botanic garden"};
const Words kStations = {"Xidan Station",   "Guomao Station",    "Dongzhimen Station", "Wangfujing Station",
                         "Qianmen Station", "Haidian Station",   "Sanlitun Station",   "Andingmen Station",
                         "Jianguomen Station", "Chongwenmen Station"};
const Words kDepartments = {"cardiology",  "pediatrics", "neurology",     "dermatology",
                            "orthopedics", "oncology",   "ophthalmology", "emergency"};
const Words kCities = {"Beijing", "Tianjin", "Shanghai", "Nanjing", "Jinan", "Shijiazhuang", "Taiyuan", "Zhengzhou"};
const Words kTrainClasses = {"first class", "second class", "business class"};
const Words kDays = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
const Words kCars = {"black Toyota", "white Tesla", "red Volkswagen", "grey Honda", "blue Hyundai", "silver Audi"};
const Words kPlaces = {"Beijing Railway Station", "Capital Airport", "Olympic Park", "Peking University",
                       "Tsinghua University",     "Beijing West Station", "Lama Temple", "Houhai Bar Street",
                       "National Library",        "Summer Palace Gate", "Daxing Airport", "Ritan Park Gate",
                       "Silk Market",             "Wudaokou Plaza", "Zhongguancun Mall", "Lido Place"};

// Name parts chosen so that no generated name contains an attribute value.
const Words kNameStems = {"Amber",   "Azure",   "Bamboo", "Bronze",  "Cedar",   "Coral",  "Crimson", "Dragon",
                          "Emerald", "Jade",    "Golden", "Ivory",   "Lotus",   "Maple",  "Misty",   "Orchid",
                          "Pearl",   "Phoenix", "Pine",   "Plum",    "Ruby",    "Sapphire", "Silver", "Stone",
                          "Willow",  "Yuanhang", "Jinghua", "Tianyi", "Huayuan", "Xinqiao", "Changan", "Yanshan",
                          "Kunlun",  "Taihe",   "Ruyi",   "Fuhua",   "Qinghe",  "Baiyun", "Longmen", "Wanshou"};
const Words kNameMiddles = {"",        "Harbor",  "Grand",   "Royal",  "Imperial", "Meadow", "River",
                            "Lake",    "Cloud",   "Spring",  "Autumn", "Summit",   "Valley", "Bay"};
const Words kHotelSuffix = {"Hotel", "Inn", "Lodge", "Suites", "Residence", "International Hotel Beijing"};
const Words kRestaurantSuffix = {"Kitchen", "Bistro", "House", "Diner", "Canteen", "Eatery", "Tavern"};
const Words kAttractionSuffix = {"Pavilion", "Terrace", "Tower", "Hall", "Court", "Bridge", "Pagoda", "Heights"};
const Words kHospitalSuffix = {"Hospital", "Clinic", "Infirmary", "Health Hall"};
const Words kStreets = {"Chaoyang", "Dongsi",   "Xisi",     "Jianguo",  "Fuxing",  "Xueyuan",  "Zhichun",
                        "Beisanhuan", "Nansanhuan", "Guanghua", "Jiaodaokou", "Gulou", "Deshengmen", "Shuangyushu"};

std::string digits(Rng& rng, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>('0' + rng.below(10)));
  return out;
}

std::string hhmm(int minutes) {
  minutes = ((minutes % 1440) + 1440) % 1440;
  std::string h = std::to_string(minutes / 60), m = std::to_string(minutes % 60);
  return std::string(2 - h.size(), '0') + h + ":" + std::string(2 - m.size(), '0') + m;
}

Words names(Rng& rng, const Words& suffixes, std::size_t n, std::set<std::string>& used) {
  Words out;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > n * 200 + 1000) throw Error(Error::Kind::generation, "name space exhausted");
    std::string middle = rng.pick(kNameMiddles);
    std::string name = rng.pick(kNameStems) + (middle.empty() ? "" : " " + middle) + " " + rng.pick(suffixes);
    if (used.insert(name).second) out.push_back(name);
  }
  return out;
}

void contact(Rng& rng, Entity& e) {
  e.attributes["address"] = "No. " + std::to_string(1 + rng.below(300)) + " " + rng.pick(kStreets) + " Road";
  e.attributes["phone"] = "010-" + digits(rng, 8);
  e.attributes["postcode"] = "100" + digits(rng, 3);
}

struct Profile {
  DomainName name;
  bool entity_less = false;
  std::vector<Attribute> schema;
  std::vector<Attribute> searchable;
  std::vector<Attribute> booking;  // add inputs, in order
  std::vector<Attribute> booking_outputs;
  std::vector<Attribute> edits;
  bool cancel = false;
};

const std::vector<Profile>& profiles() {
  static const std::vector<Profile> p = {
      {"attraction", false,
       {"name", "type", "area", "price", "station", "address", "phone", "postcode"},
       {"type", "area", "price", "station"}, {}, {}, {}, false},
      {"hospital", false,
       {"name", "department", "area", "address", "phone", "postcode"},
       {"department", "area"}, {}, {}, {}, false},
      {"hotel", false,
       {"name", "type", "area", "price", "star", "facility", "address", "phone", "postcode", "day", "stay", "people",
        "reference num."},
       {"type", "area", "price", "star", "facility"}, {"name", "day"}, {"reference num."}, {"stay", "people"}, true},
      {"restaurant", false,
       {"name", "food", "area", "price", "score", "address", "phone", "postcode", "day", "time", "people",
        "reference num."},
       {"food", "area", "price"}, {"name", "time"}, {"reference num."}, {"people", "day"}, true},
      {"train", false,
       {"name", "id", "departure", "destination", "day", "leave", "arrive", "time", "price", "class", "people",
        "reference num."},
       {"departure", "destination", "day", "leave", "arrive"}, {"id", "people"}, {"reference num."}, {}, true},
      {"taxi", true,
       {"departure", "destination", "leave", "arrive", "car", "reference num."},
       {}, {"departure", "destination"}, {"car", "reference num."}, {"leave", "arrive"}, true},
  };
  return p;
}

std::vector<ApiSpec> api_catalogue(const Database& db) {
  std::vector<ApiSpec> apis;
  for (const auto& p : profiles()) {
    std::vector<Attribute> entity_attrs;
    if (!p.entity_less) {
      for (const auto& a : p.schema) {
        bool carried = false;
        for (const auto& e : db.entities_of(p.name)) carried = carried || e.get(a);
        if (carried) entity_attrs.push_back(a);
      }
    }
    auto find_api = [&](std::vector<Attribute> inputs) {
      ApiSpec s;
      s.domain = p.name;
      s.operation = Operation::find;
      s.name = p.name + "_search_by";
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::string part = inputs[i];
        s.name += (i ? "_and_" : "_") + part;
        s.inputs.push_back({inputs[i], false});
      }
      s.outputs = entity_attrs;
      return s;
    };
    for (const auto& a : p.searchable) apis.push_back(find_api({a}));
    for (std::size_t i = 0; i < p.searchable.size(); ++i) {
      for (std::size_t j = i + 1; j < p.searchable.size(); ++j) {
        apis.push_back(find_api({p.searchable[i], p.searchable[j]}));
      }
    }
    if (!p.entity_less) {
      auto lookup = find_api({"name"});
      lookup.name = p.name + "_lookup";
      apis.push_back(lookup);
    }
    if (!p.booking.empty()) {
      ApiSpec s{p.name + "_booking", p.name, Operation::add, {}, p.booking_outputs};
      for (const auto& a : p.booking) s.inputs.push_back({a, true});
      apis.push_back(s);
    }
    for (const auto& a : p.edits) {
      apis.push_back({p.name + "_update_" + a, p.name, Operation::edit,
                      {{"reference num.", true}, {a, true}}, {a, "reference num."}});
    }
    if (p.cancel) {
      apis.push_back({p.name + "_cancel", p.name, Operation::remove, {{"reference num.", true}}, {"reference num."}});
    }
  }
  return apis;
}

}  // namespace

const std::map<DomainName, std::size_t>& default_entity_counts() {
  static const std::map<DomainName, std::size_t> m = {{"attraction", 465}, {"hospital", 91}, {"hotel", 1133},
                                                      {"restaurant", 951}, {"train", 1022}, {"taxi", 0}};
  return m;
}

const std::map<DomainName, std::size_t>& default_instruction_counts() {
  static const std::map<DomainName, std::size_t> m = {{"attraction", 90}, {"hospital", 43}, {"hotel", 80},
                                                      {"restaurant", 114}, {"train", 133}, {"taxi", 56}};
  return m;
}

Database generate_database(const WorldConfig& config) {
  Database db;
  db.registry = standard_attributes();
  for (const auto& p : profiles()) db.domains.push_back({p.name, p.entity_less, p.schema});

  auto count = [&](const std::string& d) {
    if (auto it = config.entity_counts.find(d); it != config.entity_counts.end()) return it->second;
    auto n = static_cast<double>(default_entity_counts().at(d)) * config.scale;
    return std::max<std::size_t>(n > 0 ? 1 : 0, static_cast<std::size_t>(std::llround(n)));
  };

  std::set<std::string> used;
  {
    Rng rng(Rng::derive(config.seed, "attraction"));
    for (const auto& name : names(rng, kAttractionSuffix, count("attraction"), used)) {
      Entity e{"attraction", {{"name", name}}};
      e.attributes["type"] = rng.pick(kAttractionTypes);
      e.attributes["area"] = rng.pick(kAreas);
      e.attributes["price"] = rng.pick(kAttractionPrices);
      e.attributes["station"] = rng.pick(kStations);
      contact(rng, e);
      db.entities["attraction"].push_back(std::move(e));
    }
  }
  {
    Rng rng(Rng::derive(config.seed, "hospital"));
    for (const auto& name : names(rng, kHospitalSuffix, count("hospital"), used)) {
      Entity e{"hospital", {{"name", name}}};
      e.attributes["department"] = rng.pick(kDepartments);
      e.attributes["area"] = rng.pick(kAreas);
      contact(rng, e);
      db.entities["hospital"].push_back(std::move(e));
    }
  }
  {
    Rng rng(Rng::derive(config.seed, "hotel"));
    for (const auto& name : names(rng, kHotelSuffix, count("hotel"), used)) {
      Entity e{"hotel", {{"name", name}}};
      e.attributes["type"] = rng.pick(kHotelTypes);
      e.attributes["area"] = rng.pick(kAreas);
      e.attributes["price"] = rng.pick(kPrices);
      e.attributes["star"] = rng.pick(kStars);
      e.attributes["facility"] = rng.pick(kFacilities);
      contact(rng, e);
      db.entities["hotel"].push_back(std::move(e));
    }
  }
  {
    Rng rng(Rng::derive(config.seed, "restaurant"));
    for (const auto& name : names(rng, kRestaurantSuffix, count("restaurant"), used)) {
      Entity e{"restaurant", {{"name", name}}};
      e.attributes["food"] = rng.pick(kFoods);
      e.attributes["area"] = rng.pick(kAreas);
      e.attributes["price"] = rng.pick(kPrices);
      e.attributes["score"] = std::to_string(3 + rng.below(3)) + "." + std::to_string(rng.below(10));
      contact(rng, e);
      db.entities["restaurant"].push_back(std::move(e));
    }
  }
  {
    Rng rng(Rng::derive(config.seed, "train"));
    std::set<std::string> ids;
    const Words prefixes = {"G", "D", "K", "Z"};
    for (std::size_t i = 0; i < count("train"); ++i) {
      std::string id;
      do {
        id = rng.pick(prefixes) + std::to_string(100 + rng.below(9900));
      } while (!ids.insert(id).second);
      Entity e{"train", {{"name", id}, {"id", id}}};
      auto from = rng.below(kCities.size());
      auto to = (from + 1 + rng.below(kCities.size() - 1)) % kCities.size();
      e.attributes["departure"] = kCities[from];
      e.attributes["destination"] = kCities[to];
      e.attributes["day"] = rng.pick(kDays);
      int leave = 6 * 60 + 5 * static_cast<int>(rng.below(16 * 12));
      int duration = 30 + 5 * static_cast<int>(rng.below(60));
      e.attributes["leave"] = hhmm(leave);
      e.attributes["arrive"] = hhmm(leave + duration);
      e.attributes["time"] = std::to_string(duration) + " minutes";
      e.attributes["price"] = std::to_string(20 + 5 * rng.below(100)) + " yuan";
      e.attributes["class"] = rng.pick(kTrainClasses);
      db.entities["train"].push_back(std::move(e));
    }
  }
  db.entities["taxi"];

  Words people, stays, times;
  for (int i = 1; i <= 8; ++i) people.push_back(std::to_string(i));
  for (int i = 1; i <= 7; ++i) stays.push_back(std::to_string(i));
  for (int m = 11 * 60; m <= 21 * 60; m += 15) times.push_back(hhmm(m));
  Words taxi_times;
  for (int m = 6 * 60; m <= 23 * 60; m += 15) taxi_times.push_back(hhmm(m));

  db.value_sets["hotel"] = {{"day", kDays}, {"stay", stays}, {"people", people}};
  db.value_sets["restaurant"] = {{"day", kDays}, {"time", times}, {"people", people}};
  db.value_sets["train"] = {{"people", people}};
  db.value_sets["taxi"] = {{"departure", kPlaces}, {"destination", kPlaces}, {"leave", taxi_times},
                           {"arrive", taxi_times}, {"car", kCars}};
  db.apis = api_catalogue(db);
  return db;
}

}  // namespace magdial
