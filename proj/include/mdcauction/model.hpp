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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdcauction/fixed_point.hpp"

namespace mdcauction {

using BuyerId = std::size_t;
using SellerId = std::size_t;

/// Raised when user-supplied input (scenario, instance, flags) is malformed.
/// The message names the offending field.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a mechanism would break a ledger invariant. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr std::size_t kDefaultDimension = 3;

// ---------------------------------------------------------------------------
// Resource vectors

using ResourceVector = std::vector<Quantity>;

inline ResourceVector unbounded_vector(std::size_t dimension) {
  return ResourceVector(dimension, Quantity::max());
}

inline ResourceVector zero_vector(std::size_t dimension) {
  return ResourceVector(dimension, Quantity::zero());
}

/// Component-wise a <= b. Vectors must share a dimension.
inline bool fits_within(const ResourceVector& demand, const ResourceVector& capacity) {
  for (std::size_t k = 0; k < demand.size(); ++k) {
    if (demand[k] > capacity[k]) return false;
  }
  return true;
}

inline ResourceVector component_min(const ResourceVector& a, const ResourceVector& b) {
  ResourceVector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::min(a[k], b[k]);
  return out;
}

inline void add_into(ResourceVector& acc, const ResourceVector& v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
}

inline void subtract_from(ResourceVector& acc, const ResourceVector& v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] -= v[k];
}

inline bool all_non_negative(const ResourceVector& v) {
  return std::all_of(v.begin(), v.end(), [](Quantity q) { return q >= Quantity::zero(); });
}

inline std::string to_string(const ResourceVector& v) {
  std::string out = "(";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    out += v[k].to_string();
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// Participants and bids

struct Buyer {
  BuyerId id = 0;
  Money initial_budget;
};

struct Seller {
  SellerId id = 0;
  ResourceVector per_round_capacity;
  /// Total shareable over the horizon; components equal to Quantity::max()
  /// mean unbounded.
  ResourceVector period_capacity;
  /// Ask price per unit of normalized demand, one entry per round. Only the
  /// double-auction baseline reads it; empty when the scenario has no asks.
  std::vector<Money> asks;
};

struct Bid {
  BuyerId buyer_id = 0;
  std::size_t round = 1;  // 1-based
  Money amount;
  ResourceVector demand;
};

struct Allocation {
  BuyerId buyer_id = 0;
  SellerId seller_id = 0;
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Buyer to seller pairs, kept sorted by buyer id.
struct Assignment {
  std::vector<Allocation> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  bool contains(BuyerId buyer) const {
    return std::any_of(pairs.begin(), pairs.end(),
                       [buyer](const Allocation& a) { return a.buyer_id == buyer; });
  }
  std::vector<BuyerId> buyers() const {
    std::vector<BuyerId> out;
    for (const auto& p : pairs) out.push_back(p.buyer_id);
    return out;
  }
  void normalize() {
    std::sort(pairs.begin(), pairs.end(),
              [](const Allocation& a, const Allocation& b) { return a.buyer_id < b.buyer_id; });
  }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct RoundOutcome {
  std::size_t round = 0;
  Assignment winners;
  std::map<BuyerId, Money> winning_bids;
  std::map<BuyerId, Money> payments;
  std::map<BuyerId, ResourceVector> served;
  Money utility;

  Money revenue() const {
    Money total;
    for (const auto& [buyer, paid] : payments) total += paid;
    return total;
  }
  friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

// ---------------------------------------------------------------------------
// Mechanism configuration

enum class AdjustmentScope { kWinnersOnly, kAllBuyers };
enum class TieRule { kLowestIndex };
enum class Pricing { kFirstPrice, kCriticalValue };
enum class SolverKind { kExact, kGreedy };

struct MechanismConfig {
  double gamma = 1.0;
  AdjustmentScope scope = AdjustmentScope::kWinnersOnly;
  TieRule tie_rule = TieRule::kLowestIndex;
  Pricing pricing = Pricing::kFirstPrice;
  SolverKind solver = SolverKind::kExact;
  std::uint64_t node_limit = 200'000'000;
};

/// Full experiment input with the bid matrix already materialized.
struct Scenario {
  std::size_t dimension = kDefaultDimension;
  std::vector<Buyer> buyers;
  std::vector<Seller> sellers;
  std::size_t horizon = 1;
  /// bids[buyer][round - 1]
  std::vector<std::vector<Bid>> bids;
  MechanismConfig mechanism;
  /// Set when the bids were drawn by the workload generator.
  std::optional<std::uint64_t> seed;

  bool has_asks() const {
    return !sellers.empty() && std::all_of(sellers.begin(), sellers.end(), [&](const Seller& s) {
      return s.asks.size() == horizon;
    });
  }
};

namespace detail {

inline void check_vector(const ResourceVector& v, std::size_t dimension, const std::string& field) {
  if (v.size() != dimension) {
    throw ValidationError(field + ": expected " + std::to_string(dimension) + " components, got " +
                          std::to_string(v.size()));
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] < Quantity::zero()) {
      throw ValidationError(field + "[" + std::to_string(k) + "]: must be non-negative");
    }
  }
}

}  // namespace detail

/// Throws ValidationError naming the first offending field.
inline void validate(const Scenario& s) {
  if (s.dimension == 0) throw ValidationError("dimension: must be at least 1");
  if (s.horizon < 1) throw ValidationError("horizon: must be at least 1");
  if (!std::isfinite(s.mechanism.gamma) || s.mechanism.gamma < 0.0) {
    throw ValidationError("mechanism.gamma: must be finite and non-negative");
  }
  for (std::size_t i = 0; i < s.buyers.size(); ++i) {
    const std::string field = "buyers[" + std::to_string(i) + "]";
    if (s.buyers[i].id != i) throw ValidationError(field + ".id: ids must be dense and 0-based");
    if (s.buyers[i].initial_budget < Money::zero()) {
      throw ValidationError(field + ".budget: must be non-negative");
    }
  }
  for (std::size_t j = 0; j < s.sellers.size(); ++j) {
    const std::string field = "sellers[" + std::to_string(j) + "]";
    const Seller& seller = s.sellers[j];
    if (seller.id != j) throw ValidationError(field + ".id: ids must be dense and 0-based");
    detail::check_vector(seller.per_round_capacity, s.dimension, field + ".round_capacity");
    detail::check_vector(seller.period_capacity, s.dimension, field + ".period_capacity");
    if (!seller.asks.empty()) {
      if (seller.asks.size() != s.horizon) {
        throw ValidationError(field + ".asks: expected " + std::to_string(s.horizon) + " entries");
      }
      for (Money ask : seller.asks) {
        if (ask < Money::zero()) throw ValidationError(field + ".asks: must be non-negative");
      }
    }
  }
  if (s.bids.size() != s.buyers.size()) {
    throw ValidationError("bids: expected one row per buyer (" + std::to_string(s.buyers.size()) +
                          "), got " + std::to_string(s.bids.size()));
  }
  for (std::size_t i = 0; i < s.bids.size(); ++i) {
    const std::string row = "bids[" + std::to_string(i) + "]";
    if (s.bids[i].size() != s.horizon) {
      throw ValidationError(row + ": expected " + std::to_string(s.horizon) + " rounds, got " +
                            std::to_string(s.bids[i].size()));
    }
    for (std::size_t l = 0; l < s.horizon; ++l) {
      const Bid& bid = s.bids[i][l];
      const std::string cell = row + "[" + std::to_string(l) + "]";
      if (bid.buyer_id != i || bid.round != l + 1) {
        throw ValidationError(cell + ": buyer/round index mismatch");
      }
      if (bid.amount < Money::zero()) throw ValidationError(cell + ".amount: must be non-negative");
      detail::check_vector(bid.demand, s.dimension, cell + ".demand");
    }
  }
}

// ---------------------------------------------------------------------------
// Ledger

struct AuctionLedger {
  std::vector<Money> initial_budget;
  std::vector<Money> remaining_budget;
  std::vector<ResourceVector> remaining_period_capacity;
  std::vector<RoundOutcome> history;

  /// Remaining capacity a seller can offer this round.
  ResourceVector effective_capacity(const Seller& seller) const {
    return component_min(seller.per_round_capacity, remaining_period_capacity.at(seller.id));
  }

  friend bool operator==(const AuctionLedger&, const AuctionLedger&) = default;
};

inline AuctionLedger new_ledger(const Scenario& scenario) {
  validate(scenario);
  AuctionLedger ledger;
  for (const Buyer& b : scenario.buyers) {
    ledger.initial_budget.push_back(b.initial_budget);
    ledger.remaining_budget.push_back(b.initial_budget);
  }
  for (const Seller& s : scenario.sellers) ledger.remaining_period_capacity.push_back(s.period_capacity);
  return ledger;
}

/// Applies one round's payments and served demand. Throws InvariantViolation
/// on overdraft or capacity overrun, leaving the ledger untouched.
inline void charge(AuctionLedger& ledger, const RoundOutcome& outcome) {
  Money bid_sum;
  for (const auto& [buyer, amount] : outcome.winning_bids) bid_sum += amount;
  if (bid_sum != outcome.utility) {
    throw InvariantViolation("round " + std::to_string(outcome.round) +
                             ": utility differs from the sum of winning bids");
  }
  for (const auto& [buyer, paid] : outcome.payments) {
    if (!outcome.winners.contains(buyer)) {
      throw InvariantViolation("payment charged to non-winner " + std::to_string(buyer));
    }
    if (buyer >= ledger.remaining_budget.size()) {
      throw InvariantViolation("payment charged to unknown buyer " + std::to_string(buyer));
    }
    if (paid < Money::zero() || paid > ledger.remaining_budget[buyer]) {
      throw InvariantViolation("overdraft: buyer " + std::to_string(buyer) + " pays " +
                               paid.to_string() + " with " +
                               ledger.remaining_budget[buyer].to_string() + " remaining");
    }
  }
  std::vector<ResourceVector> capacity = ledger.remaining_period_capacity;
  for (const Allocation& a : outcome.winners.pairs) {
    if (a.seller_id >= capacity.size()) {
      throw InvariantViolation("allocation to unknown seller " + std::to_string(a.seller_id));
    }
    auto it = outcome.served.find(a.buyer_id);
    if (it == outcome.served.end()) continue;
    subtract_from(capacity[a.seller_id], it->second);
    if (!all_non_negative(capacity[a.seller_id])) {
      throw InvariantViolation("period capacity overrun at seller " + std::to_string(a.seller_id));
    }
  }
  for (const auto& [buyer, paid] : outcome.payments) ledger.remaining_budget[buyer] -= paid;
  ledger.remaining_period_capacity = std::move(capacity);
  ledger.history.push_back(outcome);
}

}  // namespace mdcauction
