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

// Seeded workload generation, per-run metrics and paired multi-seed
// comparisons between mechanisms.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mdcauction/mechanisms.hpp"
#include "mdcauction/model.hpp"
#include "mdcauction/random.hpp"

namespace mdcauction {

/// Inclusive integer range in whole units.
struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct GeneratorParams {
  std::size_t n_buyers = 20;
  std::size_t m_sellers = 2;
  std::size_t horizon = 20;
  std::size_t dimension = kDefaultDimension;
  Range budget{50, 200};
  Range bid{1, 20};
  /// One range for every dimension, or one per dimension.
  std::vector<Range> demand{{1, 5}};
  std::vector<Range> capacity{{10, 30}};
  /// Absent means unbounded period capacity.
  std::optional<std::vector<Range>> period_capacity;
  Range ask{1, 10};
  std::uint64_t seed = 1;
};

namespace detail {

inline void check_range(const Range& r, const std::string& field) {
  if (r.lo < 0 || r.hi < 0) throw ValidationError("generator." + field + ": bounds must be non-negative");
  if (r.lo > r.hi) throw ValidationError("generator." + field + ": lower bound exceeds upper bound");
}

inline void check_ranges(const std::vector<Range>& rs, std::size_t dimension, const std::string& field) {
  if (rs.size() != 1 && rs.size() != dimension) {
    throw ValidationError("generator." + field + ": expected 1 or " + std::to_string(dimension) + " ranges");
  }
  for (const Range& r : rs) check_range(r, field);
}

inline const Range& range_for(const std::vector<Range>& rs, std::size_t k) { return rs.size() == 1 ? rs[0] : rs[k]; }

}  // namespace detail

inline void validate(const GeneratorParams& p) {
  if (p.horizon < 1) throw ValidationError("generator.horizon: must be at least 1");
  if (p.dimension < 1) throw ValidationError("generator.dimension: must be at least 1");
  detail::check_range(p.budget, "budget");
  detail::check_range(p.bid, "bid");
  detail::check_range(p.ask, "ask");
  detail::check_ranges(p.demand, p.dimension, "demand");
  detail::check_ranges(p.capacity, p.dimension, "capacity");
  if (p.period_capacity) detail::check_ranges(*p.period_capacity, p.dimension, "period_capacity");
}

/// Draws a scenario. Stream order: every buyer's budget; then per seller its
/// round capacity by dimension, period capacity by dimension (if ranged) and
/// one ask per round; then per round, per buyer, the bid amount followed by
/// the demand by dimension.
inline Scenario generate_scenario(const GeneratorParams& p, const MechanismConfig& mechanism = {}) {
  validate(p);
  Rng rng(p.seed);
  Scenario s;
  s.dimension = p.dimension;
  s.horizon = p.horizon;
  s.mechanism = mechanism;
  s.seed = p.seed;
  for (std::size_t i = 0; i < p.n_buyers; ++i) {
    s.buyers.push_back({i, Money::units(rng.uniform_int(p.budget.lo, p.budget.hi))});
  }
  for (std::size_t j = 0; j < p.m_sellers; ++j) {
    Seller seller;
    seller.id = j;
    for (std::size_t k = 0; k < p.dimension; ++k) {
      const Range& r = detail::range_for(p.capacity, k);
      seller.per_round_capacity.push_back(Quantity::units(rng.uniform_int(r.lo, r.hi)));
    }
    if (p.period_capacity) {
      for (std::size_t k = 0; k < p.dimension; ++k) {
        const Range& r = detail::range_for(*p.period_capacity, k);
        seller.period_capacity.push_back(Quantity::units(rng.uniform_int(r.lo, r.hi)));
      }
    } else {
      seller.period_capacity = unbounded_vector(p.dimension);
    }
    for (std::size_t l = 0; l < p.horizon; ++l) seller.asks.push_back(Money::units(rng.uniform_int(p.ask.lo, p.ask.hi)));
    s.sellers.push_back(std::move(seller));
  }
  s.bids.assign(p.n_buyers, {});
  for (std::size_t l = 1; l <= p.horizon; ++l) {
    for (std::size_t i = 0; i < p.n_buyers; ++i) {
      Bid b;
      b.buyer_id = i;
      b.round = l;
      b.amount = Money::units(rng.uniform_int(p.bid.lo, p.bid.hi));
      for (std::size_t k = 0; k < p.dimension; ++k) {
        const Range& r = detail::range_for(p.demand, k);
        b.demand.push_back(Quantity::units(rng.uniform_int(r.lo, r.hi)));
      }
      s.bids[i].push_back(std::move(b));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Mechanism selection

enum class MechanismKind { kMafl, kRepeatedSrmra, kDoubleAuction };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kMafl;
  std::optional<double> gamma;
  std::string label;
};

/// Parses "mafl", "mafl:gamma=0.5", "repeated_srmra" or "double_auction".
inline MechanismSpec parse_mechanism(const std::string& text) {
  MechanismSpec spec;
  spec.label = text;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (name == "mafl") spec.kind = MechanismKind::kMafl;
  else if (name == "repeated_srmra" || name == "srmra") spec.kind = MechanismKind::kRepeatedSrmra;
  else if (name == "double_auction") spec.kind = MechanismKind::kDoubleAuction;
  else throw ValidationError("mechanism: unknown mechanism '" + name + "'");
  if (colon != std::string::npos) {
    const std::string opt = text.substr(colon + 1);
    if (spec.kind != MechanismKind::kMafl || opt.rfind("gamma=", 0) != 0) {
      throw ValidationError("mechanism: unsupported option '" + opt + "' for " + name);
    }
    try {
      std::size_t used = 0;
      const double g = std::stod(opt.substr(6), &used);
      if (used != opt.size() - 6 || !std::isfinite(g) || g < 0.0) throw std::invalid_argument(opt);
      spec.gamma = g;
    } catch (const std::exception&) {
      throw ValidationError("mechanism: invalid gamma in '" + text + "'");
    }
  }
  return spec;
}

struct RunMetrics {
  Money total_revenue;
  Money total_utility;
  /// Round after which the buyer's remaining budget first reached zero; 0 for
  /// a buyer that started with nothing; empty for "never".
  std::vector<std::optional<std::size_t>> exhaustion_round;
  /// Winner-rounds over buyer-rounds.
  double allocation_ratio = 0.0;

  std::size_t exhausted_count() const {
    return static_cast<std::size_t>(std::count_if(exhaustion_round.begin(), exhaustion_round.end(),
                                                  [](const auto& r) { return r.has_value(); }));
  }
};

struct Evaluation {
  AuctionResult result;
  RunMetrics metrics;
};

inline RunMetrics compute_metrics(const AuctionResult& result) {
  RunMetrics m;
  const AuctionLedger& ledger = result.final_ledger;
  const std::size_t n = ledger.initial_budget.size();
  for (const RoundOutcome& o : result.per_round) {
    m.total_utility += o.utility;
    m.total_revenue += o.revenue();
  }
  m.exhaustion_round.assign(n, std::nullopt);
  std::vector<Money> remaining = ledger.initial_budget;
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] <= Money::zero()) m.exhaustion_round[i] = 0;
  }
  std::size_t winner_rounds = 0;
  for (const RoundOutcome& o : result.per_round) {
    winner_rounds += o.winners.size();
    for (const auto& [buyer, paid] : o.payments) {
      remaining[buyer] -= paid;
      if (!m.exhaustion_round[buyer] && remaining[buyer] <= Money::zero()) m.exhaustion_round[buyer] = o.round;
    }
  }
  const std::size_t buyer_rounds = n * result.per_round.size();
  m.allocation_ratio = buyer_rounds == 0 ? 0.0 : static_cast<double>(winner_rounds) / static_cast<double>(buyer_rounds);
  return m;
}

inline AuctionResult run_mechanism(const Scenario& scenario, const MechanismSpec& spec) {
  Scenario s = scenario;
  if (spec.gamma) s.mechanism.gamma = *spec.gamma;
  switch (spec.kind) {
    case MechanismKind::kMafl: return run_mafl(s);
    case MechanismKind::kRepeatedSrmra: return run_repeated_srmra(s);
    case MechanismKind::kDoubleAuction: return run_double_auction(s);
  }
  throw ValidationError("mechanism: unknown kind");
}

inline Evaluation evaluate(const Scenario& scenario, const MechanismSpec& spec) {
  Evaluation e;
  e.result = run_mechanism(scenario, spec);
  e.metrics = compute_metrics(e.result);
  return e;
}

inline Evaluation evaluate(const Scenario& scenario, const std::string& mechanism) {
  return evaluate(scenario, parse_mechanism(mechanism));
}

// ---------------------------------------------------------------------------
// Paired comparisons

struct SeedResult {
  std::uint64_t seed = 0;
  std::string mechanism;
  RunMetrics metrics;
};

struct MechanismSummary {
  std::string mechanism;
  double mean_revenue = 0.0;
  double median_revenue = 0.0;
};

struct PairwiseSummary {
  std::string a;
  std::string b;
  /// (mean_a - mean_b) / mean_b * 100; empty when mean_b is zero.
  std::optional<double> improvement_pct;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  /// Fraction of seeds with revenue_a > revenue_b; ties count for neither.
  double win_rate = 0.0;
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
};

struct ComparisonReport {
  std::uint64_t base_seed = 0;
  std::size_t n_seeds = 0;
  std::size_t bootstrap_resamples = 0;
  std::vector<std::string> mechanisms;
  /// Ordered by seed, then by mechanism order.
  std::vector<SeedResult> per_seed;
  std::vector<MechanismSummary> summaries;
  std::vector<PairwiseSummary> pairs;

  friend bool operator==(const ComparisonReport& a, const ComparisonReport& b) {
    if (a.per_seed.size() != b.per_seed.size()) return false;
    for (std::size_t i = 0; i < a.per_seed.size(); ++i) {
      const auto& x = a.per_seed[i];
      const auto& y = b.per_seed[i];
      if (x.seed != y.seed || x.mechanism != y.mechanism || x.metrics.total_revenue != y.metrics.total_revenue ||
          x.metrics.total_utility != y.metrics.total_utility || x.metrics.exhaustion_round != y.metrics.exhaustion_round)
        return false;
    }
    if (a.pairs.size() != b.pairs.size()) return false;
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
      if (a.pairs[i].improvement_pct != b.pairs[i].improvement_pct || a.pairs[i].ci_low != b.pairs[i].ci_low ||
          a.pairs[i].ci_high != b.pairs[i].ci_high || a.pairs[i].wins != b.pairs[i].wins)
        return false;
    }
    return a.base_seed == b.base_seed && a.n_seeds == b.n_seeds && a.mechanisms == b.mechanisms;
  }
};

struct CompareOptions {
  std::size_t bootstrap_resamples = 1000;
  /// 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline std::optional<double> improvement(double mean_a, double mean_b) {
  if (mean_b == 0.0) {
    if (mean_a == 0.0) return 0.0;
    return std::nullopt;
  }
  return (mean_a - mean_b) / mean_b * 100.0;
}

}  // namespace detail

/// Runs every mechanism on the same generated scenario for seeds
/// params.seed, params.seed + 1, ..., and summarizes paired differences.
inline ComparisonReport compare(const GeneratorParams& params, const std::vector<MechanismSpec>& mechanisms,
                                std::size_t n_seeds, const MechanismConfig& base = {}, const CompareOptions& options = {}) {
  if (n_seeds < 1) throw ValidationError("seeds: must be at least 1");
  if (mechanisms.empty()) throw ValidationError("mechanisms: at least one is required");
  validate(params);

  ComparisonReport report;
  report.base_seed = params.seed;
  report.n_seeds = n_seeds;
  report.bootstrap_resamples = options.bootstrap_resamples;
  for (const auto& m : mechanisms) report.mechanisms.push_back(m.label);

  const std::size_t k = mechanisms.size();
  std::vector<std::vector<RunMetrics>> results(n_seeds, std::vector<RunMetrics>(k));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t s = next++; s < n_seeds && !failed; s = next++) {
      try {
        GeneratorParams p = params;
        p.seed = params.seed + s;
        const Scenario scenario = generate_scenario(p, base);
        for (std::size_t m = 0; m < k; ++m) results[s][m] = evaluate(scenario, mechanisms[m]).metrics;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_seeds);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<double>> revenue(k, std::vector<double>(n_seeds));
  for (std::size_t s = 0; s < n_seeds; ++s) {
    for (std::size_t m = 0; m < k; ++m) {
      report.per_seed.push_back({params.seed + s, mechanisms[m].label, results[s][m]});
      revenue[m][s] = results[s][m].total_revenue.to_double();
    }
  }
  for (std::size_t m = 0; m < k; ++m) {
    report.summaries.push_back({mechanisms[m].label, detail::mean_of(revenue[m]), detail::median_of(revenue[m])});
  }

  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      PairwiseSummary pair;
      pair.a = mechanisms[a].label;
      pair.b = mechanisms[b].label;
      pair.improvement_pct = detail::improvement(report.summaries[a].mean_revenue, report.summaries[b].mean_revenue);
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const Money ra = results[s][a].total_revenue;
        const Money rb = results[s][b].total_revenue;
        if (ra > rb) ++pair.wins;
        else if (ra == rb) ++pair.ties;
        else ++pair.losses;
      }
      pair.win_rate = static_cast<double>(pair.wins) / static_cast<double>(n_seeds);

      // Paired percentile bootstrap over seeds.
      Rng rng(params.seed ^ (0x9E3779B97F4A7C15ULL * (a * k + b + 1)));
      std::vector<double> draws;
      for (std::size_t r = 0; r < options.bootstrap_resamples; ++r) {
        long double sa = 0.0L, sb = 0.0L;
        for (std::size_t s = 0; s < n_seeds; ++s) {
          const std::size_t pick = rng.index(n_seeds);
          sa += revenue[a][pick];
          sb += revenue[b][pick];
        }
        if (auto imp = detail::improvement(static_cast<double>(sa), static_cast<double>(sb))) draws.push_back(*imp);
      }
      if (!draws.empty() && pair.improvement_pct) {
        std::sort(draws.begin(), draws.end());
        const auto at = [&](double q) {
          const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(draws.size() - 1) + 0.5));
          return draws[std::min(idx, draws.size() - 1)];
        };
        pair.ci_low = at(0.025);
        pair.ci_high = at(0.975);
      }
      report.pairs.push_back(pair);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string format_exhaustion(const std::optional<std::size_t>& r) {
  return r ? std::to_string(*r) : std::string("never");
}

/// One row per seed x mechanism. Comma-separated, '.' decimal point, LF.
inline void write_csv(std::ostream& os, const ComparisonReport& report) {
  os << "seed,mechanism,revenue,utility,allocation_ratio,exhausted_buyers,mean_exhaustion_round\n";
  for (const SeedResult& r : report.per_seed) {
    std::size_t count = 0, sum = 0;
    for (const auto& e : r.metrics.exhaustion_round) {
      if (e) {
        ++count;
        sum += *e;
      }
    }
    os << r.seed << ',' << r.mechanism << ',' << r.metrics.total_revenue << ',' << r.metrics.total_utility << ','
       << format_double(r.metrics.allocation_ratio) << ',' << count << ','
       << (count ? format_double(static_cast<double>(sum) / static_cast<double>(count), 3) : std::string("never"))
       << '\n';
  }
}

}  // namespace mdcauction
