// Copyright 2026 The mdcauction Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// JSON scenario, fixture and experiment-profile files.
//
// Scenario:
//   { "dimension": 3, "horizon": 6,
//     "buyers":  [ {"id": 0, "budget": 15}, ... ],
//     "sellers": [ {"id": 0, "round_capacity": [2], "period_capacity": [..],
//                   "asks": [..] | number }, ... ],
//     "bids":    [ [ {"amount": 3, "demand": [1]}, ... per round ], ... per buyer ],
//     "generator": { ... },           // instead of buyers/sellers/bids
//     "mechanism": { "name": "mafl", "gamma": 1, "scope": "winners_only",
//                    "tie_rule": "lowest_index", "pricing": "first_price",
//                    "solver": "exact", "node_limit": 200000000 } }
//
// Replay fixture:
//   { "name": "table1", "budgets": [..], "items_per_round": 2,
//     "bids": [ [..per round..], ..per buyer.. ] }
//
// Quantities are decimal numbers with up to three fractional digits. A null
// period-capacity component means unbounded.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mdcauction/model.hpp"
#include "mdcauction/simlab.hpp"

namespace mdcauction::io {

using nlohmann::json;

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
inline std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError((path.empty() ? "<root>" : path) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(join(path, key) + ": required field is missing");
  return *it;
}

inline const json& array_at(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array");
  return v;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::size_t count(const json& v, const std::string& path) {
  const std::int64_t x = integer(v, path);
  if (x < 0) throw ValidationError(path + ": must be non-negative");
  return static_cast<std::size_t>(x);
}

template <typename T>
T fixed(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (x < 0.0) throw ValidationError(path + ": must be non-negative");
  try {
    return T::from_double(x);
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline ResourceVector resources(const json& v, const std::string& path, bool allow_null = false) {
  ResourceVector out;
  const json& arr = array_at(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (allow_null && arr[k].is_null()) out.push_back(Quantity::max());
    else out.push_back(fixed<Quantity>(arr[k], at_index(path, k)));
  }
  return out;
}

inline std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path + ": expected a string");
  return v.get<std::string>();
}

inline Range range(const json& v, const std::string& path) {
  const json& arr = array_at(v, path);
  if (arr.size() != 2) throw ValidationError(path + ": expected [lo, hi]");
  return {integer(arr[0], at_index(path, 0)), integer(arr[1], at_index(path, 1))};
}

inline std::vector<Range> ranges(const json& v, const std::string& path) {
  const json& arr = array_at(v, path);
  if (!arr.empty() && arr[0].is_array()) {
    std::vector<Range> out;
    for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(range(arr[k], at_index(path, k)));
    return out;
  }
  return {range(v, path)};
}

inline json money_json(Money m) {
  if (m.raw() % Money::kScale == 0) return m.raw() / Money::kScale;
  return m.to_double();
}

inline json quantity_json(Quantity q) {
  if (q.is_unbounded()) return nullptr;
  if (q.raw() % Quantity::kScale == 0) return q.raw() / Quantity::kScale;
  return q.to_double();
}

}  // namespace detail

/// Parses JSON text; syntax errors are reported with line and column.
inline json parse_text(const std::string& content, const std::string& source) {
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, content.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (content[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": malformed JSON");
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Mechanism block

/// Fields of a `mechanism` block. `name` picks the default mechanism for runs.
struct MechanismBlock {
  MechanismConfig config;
  std::optional<std::string> name;
};

inline MechanismBlock parse_mechanism_block(const json& v, const std::string& path, MechanismConfig base = {}) {
  MechanismBlock block{base, std::nullopt};
  if (!v.is_object()) throw ValidationError(path + ": expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string field = detail::join(path, key);
    if (key == "gamma") {
      block.config.gamma = detail::number(value, field);
      if (block.config.gamma < 0.0) throw ValidationError(field + ": must be non-negative");
    } else if (key == "scope") {
      const std::string s = detail::text(value, field);
      if (s == "winners_only") block.config.scope = AdjustmentScope::kWinnersOnly;
      else if (s == "all_buyers") block.config.scope = AdjustmentScope::kAllBuyers;
      else throw ValidationError(field + ": expected winners_only or all_buyers");
    } else if (key == "tie_rule") {
      if (detail::text(value, field) != "lowest_index") throw ValidationError(field + ": only lowest_index is supported");
    } else if (key == "pricing") {
      const std::string s = detail::text(value, field);
      if (s == "first_price") block.config.pricing = Pricing::kFirstPrice;
      else if (s == "critical_value") block.config.pricing = Pricing::kCriticalValue;
      else throw ValidationError(field + ": expected first_price or critical_value");
    } else if (key == "solver") {
      const std::string s = detail::text(value, field);
      if (s == "exact") block.config.solver = SolverKind::kExact;
      else if (s == "greedy") block.config.solver = SolverKind::kGreedy;
      else throw ValidationError(field + ": expected exact or greedy");
    } else if (key == "node_limit") {
      block.config.node_limit = detail::count(value, field);
    } else if (key == "name") {
      block.name = detail::text(value, field);
      parse_mechanism(*block.name);
    } else {
      throw ValidationError(field + ": unknown field");
    }
  }
  return block;
}

inline json to_json(const MechanismConfig& c, const std::optional<std::string>& name = std::nullopt) {
  json j;
  if (name) j["name"] = *name;
  j["gamma"] = c.gamma;
  j["scope"] = c.scope == AdjustmentScope::kWinnersOnly ? "winners_only" : "all_buyers";
  j["tie_rule"] = "lowest_index";
  j["pricing"] = c.pricing == Pricing::kFirstPrice ? "first_price" : "critical_value";
  j["solver"] = c.solver == SolverKind::kExact ? "exact" : "greedy";
  j["node_limit"] = c.node_limit;
  return j;
}

// ---------------------------------------------------------------------------
// Generator block

inline GeneratorParams parse_generator(const json& v, const std::string& path) {
  GeneratorParams p;
  if (!v.is_object()) throw ValidationError(path + ": expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string field = detail::join(path, key);
    if (key == "n_buyers") p.n_buyers = detail::count(value, field);
    else if (key == "m_sellers") p.m_sellers = detail::count(value, field);
    else if (key == "horizon") p.horizon = detail::count(value, field);
    else if (key == "dimension") p.dimension = detail::count(value, field);
    else if (key == "budget") p.budget = detail::range(value, field);
    else if (key == "bid") p.bid = detail::range(value, field);
    else if (key == "ask") p.ask = detail::range(value, field);
    else if (key == "demand") p.demand = detail::ranges(value, field);
    else if (key == "capacity") p.capacity = detail::ranges(value, field);
    else if (key == "period_capacity") {
      if (!value.is_null()) p.period_capacity = detail::ranges(value, field);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) throw ValidationError(field + ": expected an integer");
      p.seed = value.get<std::uint64_t>();
    } else {
      throw ValidationError(field + ": unknown field");
    }
  }
  validate(p);
  return p;
}

inline json to_json(const GeneratorParams& p) {
  auto r = [](const Range& x) { return json::array({x.lo, x.hi}); };
  auto rs = [&](const std::vector<Range>& xs) {
    if (xs.size() == 1) return r(xs[0]);
    json a = json::array();
    for (const auto& x : xs) a.push_back(r(x));
    return a;
  };
  json j;
  j["n_buyers"] = p.n_buyers;
  j["m_sellers"] = p.m_sellers;
  j["horizon"] = p.horizon;
  j["dimension"] = p.dimension;
  j["budget"] = r(p.budget);
  j["bid"] = r(p.bid);
  j["demand"] = rs(p.demand);
  j["capacity"] = rs(p.capacity);
  if (p.period_capacity) j["period_capacity"] = rs(*p.period_capacity);
  j["ask"] = r(p.ask);
  j["seed"] = p.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Scenario

struct LoadedScenario {
  Scenario scenario;
  std::optional<std::string> mechanism_name;
  std::optional<GeneratorParams> generator;
};

/// Builds a validated scenario. A generator block is materialized with
/// `seed_override` when given, else with its own seed.
inline LoadedScenario parse_scenario(const json& root, std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (!root.is_object()) throw ValidationError("<root>: expected an object");
  for (const auto& [key, value] : root.items()) {
    static const std::vector<std::string> known{"dimension", "horizon", "buyers", "sellers", "bids",
                                                "generator", "mechanism", "name", "description"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ValidationError(key + ": unknown field");
  }
  LoadedScenario out;
  MechanismConfig config;
  if (root.contains("mechanism")) {
    auto block = parse_mechanism_block(root["mechanism"], "mechanism");
    config = block.config;
    out.mechanism_name = block.name;
  }

  const bool has_bids = root.contains("bids");
  const bool has_gen = root.contains("generator");
  if (has_bids == has_gen) throw ValidationError("bids/generator: exactly one of them must be present");

  if (has_gen) {
    for (const char* key : {"buyers", "sellers"}) {
      if (root.contains(key)) throw ValidationError(std::string(key) + ": not allowed together with generator");
    }
    GeneratorParams p = parse_generator(root["generator"], "generator");
    if (seed_override) p.seed = *seed_override;
    if (root.contains("horizon") && detail::count(root["horizon"], "horizon") != p.horizon) {
      throw ValidationError("horizon: disagrees with generator.horizon");
    }
    out.scenario = generate_scenario(p, config);
    out.generator = p;
    validate(out.scenario);
    return out;
  }

  Scenario& s = out.scenario;
  s.mechanism = config;
  s.horizon = detail::count(detail::require(root, "horizon", ""), "horizon");

  const json& buyers = detail::array_at(detail::require(root, "buyers", ""), "buyers");
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    const std::string path = detail::at_index("buyers", i);
    Buyer b;
    b.id = detail::count(detail::require(buyers[i], "id", path), path + ".id");
    b.initial_budget = detail::fixed<Money>(detail::require(buyers[i], "budget", path), path + ".budget");
    s.buyers.push_back(b);
  }

  const json& sellers = detail::array_at(detail::require(root, "sellers", ""), "sellers");
  std::optional<std::size_t> inferred;
  for (std::size_t j = 0; j < sellers.size(); ++j) {
    const std::string path = detail::at_index("sellers", j);
    Seller seller;
    seller.id = detail::count(detail::require(sellers[j], "id", path), path + ".id");
    seller.per_round_capacity =
        detail::resources(detail::require(sellers[j], "round_capacity", path), path + ".round_capacity");
    if (!inferred) inferred = seller.per_round_capacity.size();
    if (sellers[j].contains("period_capacity") && !sellers[j]["period_capacity"].is_null()) {
      seller.period_capacity = detail::resources(sellers[j]["period_capacity"], path + ".period_capacity", true);
    } else {
      seller.period_capacity = unbounded_vector(seller.per_round_capacity.size());
    }
    if (sellers[j].contains("asks")) {
      const json& asks = sellers[j]["asks"];
      if (asks.is_number()) {
        seller.asks.assign(s.horizon, detail::fixed<Money>(asks, path + ".asks"));
      } else {
        const json& arr = detail::array_at(asks, path + ".asks");
        for (std::size_t l = 0; l < arr.size(); ++l) {
          seller.asks.push_back(detail::fixed<Money>(arr[l], detail::at_index(path + ".asks", l)));
        }
      }
    }
    s.sellers.push_back(std::move(seller));
  }

  const json& rows = detail::array_at(root["bids"], "bids");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string row_path = detail::at_index("bids", i);
    const json& row = detail::array_at(rows[i], row_path);
    std::vector<Bid> bids;
    for (std::size_t l = 0; l < row.size(); ++l) {
      const std::string path = detail::at_index(row_path, l);
      Bid b;
      b.buyer_id = i;
      b.round = l + 1;
      b.amount = detail::fixed<Money>(detail::require(row[l], "amount", path), path + ".amount");
      b.demand = detail::resources(detail::require(row[l], "demand", path), path + ".demand");
      if (!inferred) inferred = b.demand.size();
      bids.push_back(std::move(b));
    }
    s.bids.push_back(std::move(bids));
  }

  if (root.contains("dimension")) s.dimension = detail::count(root["dimension"], "dimension");
  else s.dimension = inferred.value_or(kDefaultDimension);
  validate(s);
  return out;
}

inline LoadedScenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
  return parse_scenario(read_json_file(path), seed_override);
}

inline json to_json(const Scenario& s, const std::optional<std::string>& mechanism_name = std::nullopt) {
  json j;
  j["dimension"] = s.dimension;
  j["horizon"] = s.horizon;
  j["buyers"] = json::array();
  for (const Buyer& b : s.buyers) j["buyers"].push_back({{"id", b.id}, {"budget", detail::money_json(b.initial_budget)}});
  j["sellers"] = json::array();
  for (const Seller& seller : s.sellers) {
    json o;
    o["id"] = seller.id;
    o["round_capacity"] = json::array();
    for (Quantity q : seller.per_round_capacity) o["round_capacity"].push_back(detail::quantity_json(q));
    const bool unbounded = std::all_of(seller.period_capacity.begin(), seller.period_capacity.end(),
                                       [](Quantity q) { return q.is_unbounded(); });
    if (!unbounded) {
      o["period_capacity"] = json::array();
      for (Quantity q : seller.period_capacity) o["period_capacity"].push_back(detail::quantity_json(q));
    }
    if (!seller.asks.empty()) {
      o["asks"] = json::array();
      for (Money m : seller.asks) o["asks"].push_back(detail::money_json(m));
    }
    j["sellers"].push_back(std::move(o));
  }
  j["bids"] = json::array();
  for (const auto& row : s.bids) {
    json r = json::array();
    for (const Bid& b : row) {
      json d = json::array();
      for (Quantity q : b.demand) d.push_back(detail::quantity_json(q));
      r.push_back({{"amount", detail::money_json(b.amount)}, {"demand", std::move(d)}});
    }
    j["bids"].push_back(std::move(r));
  }
  j["mechanism"] = to_json(s.mechanism, mechanism_name);
  return j;
}

// ---------------------------------------------------------------------------
// Replay fixtures

struct ReplayFixture {
  std::string name;
  std::vector<Money> budgets;
  std::size_t items_per_round = 1;
  std::vector<std::vector<Money>> bids;
};

inline ReplayFixture parse_fixture(const json& root, const std::string& fallback_name) {
  ReplayFixture f;
  f.name = root.is_object() && root.contains("name") ? detail::text(root["name"], "name") : fallback_name;
  const json& budgets = detail::array_at(detail::require(root, "budgets", ""), "budgets");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    f.budgets.push_back(detail::fixed<Money>(budgets[i], detail::at_index("budgets", i)));
  }
  const json& items = detail::require(root, "items_per_round", "");
  f.items_per_round = detail::count(items, "items_per_round");
  const json& rows = detail::array_at(detail::require(root, "bids", ""), "bids");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string row_path = detail::at_index("bids", i);
    const json& row = detail::array_at(rows[i], row_path);
    std::vector<Money> r;
    for (std::size_t l = 0; l < row.size(); ++l) r.push_back(detail::fixed<Money>(row[l], detail::at_index(row_path, l)));
    f.bids.push_back(std::move(r));
  }
  if (f.bids.size() != f.budgets.size()) {
    throw ValidationError("bids: expected " + std::to_string(f.budgets.size()) + " rows (one per budget), got " +
                          std::to_string(f.bids.size()));
  }
  for (std::size_t i = 1; i < f.bids.size(); ++i) {
    if (f.bids[i].size() != f.bids[0].size()) {
      throw ValidationError(detail::at_index("bids", i) + ": ragged row, expected " + std::to_string(f.bids[0].size()) +
                            " rounds, got " + std::to_string(f.bids[i].size()));
    }
  }
  return f;
}

inline ReplayFixture load_fixture(const std::string& path) {
  return parse_fixture(read_json_file(path), path);
}

// ---------------------------------------------------------------------------
// Experiment profiles (compare / gen input)

struct Profile {
  GeneratorParams generator;
  MechanismConfig mechanism;
  std::vector<std::string> mechanisms{"mafl", "repeated_srmra"};
  std::size_t seeds = 100;
};

inline Profile parse_profile(const json& root) {
  Profile p;
  if (!root.is_object()) throw ValidationError("<root>: expected an object");
  for (const auto& [key, value] : root.items()) {
    if (key == "generator") p.generator = parse_generator(value, "generator");
    else if (key == "mechanism") p.mechanism = parse_mechanism_block(value, "mechanism").config;
    else if (key == "mechanisms") {
      const json& arr = detail::array_at(value, "mechanisms");
      p.mechanisms.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        p.mechanisms.push_back(detail::text(arr[i], detail::at_index("mechanisms", i)));
        parse_mechanism(p.mechanisms.back());
      }
    } else if (key == "seeds") {
      p.seeds = detail::count(value, "seeds");
    } else if (key != "name" && key != "description") {
      throw ValidationError(key + ": unknown field");
    }
  }
  return p;
}

inline Profile load_profile(const std::string& path) { return parse_profile(read_json_file(path)); }

inline json summary_json(const ComparisonReport& r) {
  auto opt = [](const std::optional<double>& v) -> json { return v ? json(*v) : json(nullptr); };
  json j;
  j["rng"] = Rng::kName;
  j["base_seed"] = r.base_seed;
  j["seeds"] = r.n_seeds;
  j["bootstrap_resamples"] = r.bootstrap_resamples;
  j["mechanisms"] = json::array();
  for (const auto& m : r.summaries) {
    j["mechanisms"].push_back({{"name", m.mechanism}, {"mean_revenue", m.mean_revenue}, {"median_revenue", m.median_revenue}});
  }
  j["pairs"] = json::array();
  for (const auto& p : r.pairs) {
    j["pairs"].push_back({{"a", p.a},
                          {"b", p.b},
                          {"improvement_pct", opt(p.improvement_pct)},
                          {"ci95_low", opt(p.ci_low)},
                          {"ci95_high", opt(p.ci_high)},
                          {"win_rate", p.win_rate},
                          {"wins", p.wins},
                          {"ties", p.ties},
                          {"losses", p.losses}});
  }
  return j;
}

}  // namespace mdcauction::io
