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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdcauction/model.hpp"
#include "mdcauction/wdp.hpp"

namespace mdcauction {

struct AdjustmentPolicy {
  double gamma = 1.0;
  AdjustmentScope scope = AdjustmentScope::kWinnersOnly;
};

struct AuctionResult {
  std::vector<RoundOutcome> per_round;
  Money total_utility;
  Money total_revenue;
  AuctionLedger final_ledger;
};

/// Effective bid for a buyer whose budget has partly been spent.
///
/// The bid is clamped to the remaining budget, scaled by
/// (remaining / initial)^gamma when the policy applies to this buyer, floored
/// to the milli-unit and clamped again. A zero initial budget yields 0.
inline Money adjust_bid(Money true_amount, Money remaining, Money initial, const AdjustmentPolicy& policy,
                        bool won_previous) {
  if (!std::isfinite(policy.gamma) || policy.gamma < 0.0) {
    throw ValidationError("gamma: must be finite and non-negative");
  }
  if (initial <= Money::zero() || remaining <= Money::zero()) return Money::zero();
  const Money clamped = std::clamp(true_amount, Money::zero(), remaining);
  if (policy.scope == AdjustmentScope::kWinnersOnly && !won_previous) return clamped;
  if (policy.gamma == 0.0 || remaining >= initial) return clamped;

  std::int64_t scaled = 0;
  if (policy.gamma == 1.0) {
    scaled = static_cast<std::int64_t>(static_cast<__int128>(clamped.raw()) * remaining.raw() / initial.raw());
  } else {
    const long double ratio = static_cast<long double>(remaining.raw()) / static_cast<long double>(initial.raw());
    const long double factor = std::pow(ratio, static_cast<long double>(policy.gamma));
    scaled = static_cast<std::int64_t>(std::floor(static_cast<long double>(clamped.raw()) * factor));
  }
  return std::clamp(Money::from_raw(scaled), Money::zero(), std::min(clamped, remaining));
}

namespace detail {

inline WdpInstance round_instance(std::span<const Bid> bids, std::span<const Seller> sellers,
                                  const AuctionLedger& ledger, std::size_t dimension) {
  WdpInstance instance;
  instance.dimension = dimension;
  for (const Bid& b : bids) {
    if (b.amount > Money::zero()) instance.bids.push_back(b);
  }
  for (const Seller& s : sellers) instance.seller_caps.push_back(ledger.effective_capacity(s));
  return instance;
}

inline void finish_result(AuctionResult& result, AuctionLedger ledger) {
  for (const RoundOutcome& o : result.per_round) {
    result.total_utility += o.utility;
    result.total_revenue += o.revenue();
  }
  result.final_ledger = std::move(ledger);
}

}  // namespace detail

/// One sealed-bid round: winners by winner determination, payments by the
/// configured pricing rule, ledger charged. `bids` must already be clamped to
/// remaining budgets; anything above is clamped here.
inline RoundOutcome run_srmra(std::span<const Bid> bids, std::span<const Seller> sellers, AuctionLedger& ledger,
                              const MechanismConfig& config, std::size_t round = 1) {
  std::size_t dimension = 0;
  if (!sellers.empty()) dimension = sellers.front().per_round_capacity.size();
  else if (!bids.empty()) dimension = bids.front().demand.size();
  for (const Seller& s : sellers) {
    if (s.per_round_capacity.size() != dimension) {
      throw ValidationError("sellers[" + std::to_string(s.id) + "].round_capacity: dimension mismatch");
    }
  }
  std::vector<Bid> clamped;
  for (const Bid& b : bids) {
    if (b.demand.size() != dimension) {
      throw ValidationError("bid of buyer " + std::to_string(b.buyer_id) + ": demand dimension " +
                            std::to_string(b.demand.size()) + " does not match sellers' " +
                            std::to_string(dimension));
    }
    Bid c = b;
    c.amount = std::min(b.amount, ledger.remaining_budget.at(b.buyer_id));
    clamped.push_back(std::move(c));
  }

  RoundOutcome outcome;
  outcome.round = round;
  const WdpInstance instance = detail::round_instance(clamped, sellers, ledger, dimension);
  if (instance.bids.empty() || instance.seller_caps.empty()) {
    charge(ledger, outcome);
    return outcome;
  }
  const WdpSolution solution = solve(instance, config.solver, config.node_limit);
  if (!check_feasible(solution.assignment, instance)) {
    throw InvariantViolation("round " + std::to_string(round) + ": solver returned an infeasible assignment");
  }

  outcome.winners = solution.assignment;
  for (const Allocation& a : outcome.winners.pairs) {
    const auto it = std::find_if(instance.bids.begin(), instance.bids.end(),
                                 [&](const Bid& b) { return b.buyer_id == a.buyer_id; });
    outcome.winning_bids[a.buyer_id] = it->amount;
    outcome.served[a.buyer_id] = it->demand;
    outcome.utility += it->amount;
  }

  for (const auto& [buyer, amount] : outcome.winning_bids) {
    Money price = amount;
    if (config.pricing == Pricing::kCriticalValue) {
      // Clarke pivot: welfare of the others without this buyer minus their
      // welfare with it. Equals the critical bid under exact optimization.
      WdpInstance without = instance;
      std::erase_if(without.bids, [b = buyer](const Bid& x) { return x.buyer_id == b; });
      const Money others_without = solve(without, config.solver, config.node_limit).objective;
      const Money others_with = solution.objective - amount;
      price = std::clamp(others_without - others_with, Money::zero(), amount);
    }
    outcome.payments[buyer] = price;
  }
  charge(ledger, outcome);
  return outcome;
}

namespace detail {

using BidTransform = std::function<Money(const Bid&, const AuctionLedger&, bool won_previous)>;

inline AuctionResult run_rounds(const Scenario& scenario, const BidTransform& transform) {
  AuctionLedger ledger = new_ledger(scenario);
  AuctionResult result;
  std::vector<bool> won_previous(scenario.buyers.size(), false);
  for (std::size_t l = 1; l <= scenario.horizon; ++l) {
    std::vector<Bid> effective;
    for (std::size_t i = 0; i < scenario.buyers.size(); ++i) {
      Bid b = scenario.bids[i][l - 1];
      b.amount = transform(b, ledger, won_previous[i]);
      effective.push_back(std::move(b));
    }
    RoundOutcome outcome = run_srmra(effective, scenario.sellers, ledger, scenario.mechanism, l);
    std::fill(won_previous.begin(), won_previous.end(), false);
    for (BuyerId w : outcome.winners.buyers()) won_previous[w] = true;
    result.per_round.push_back(std::move(outcome));
  }
  finish_result(result, std::move(ledger));
  return result;
}

}  // namespace detail

/// The single-round auction run once per round on budget-clamped bids.
inline AuctionResult run_repeated_srmra(const Scenario& scenario) {
  return detail::run_rounds(scenario, [](const Bid& b, const AuctionLedger& ledger, bool) {
    return std::min(b.amount, ledger.remaining_budget[b.buyer_id]);
  });
}

/// Long-term framework: each round's bids are scaled down by the bidder's
/// remaining budget share before the single-round auction runs.
inline AuctionResult run_mafl(const Scenario& scenario) {
  const AdjustmentPolicy policy{scenario.mechanism.gamma, scenario.mechanism.scope};
  return detail::run_rounds(scenario, [&](const Bid& b, const AuctionLedger& ledger, bool won_previous) {
    return adjust_bid(b.amount, ledger.remaining_budget[b.buyer_id], ledger.initial_budget[b.buyer_id], policy,
                      won_previous);
  });
}

/// Table replay: unit demands, one seller offering `items_per_round` units.
/// Each round bids are clamped to the remaining budget and the top
/// `items_per_round` positive bids win, ties to the lower index. Winners pay
/// their bids. bid_matrix is indexed [buyer][round].
inline AuctionResult replay(const std::vector<std::vector<Money>>& bid_matrix, const std::vector<Money>& budgets,
                            std::size_t items_per_round) {
  if (bid_matrix.size() != budgets.size()) {
    throw ValidationError("bids: expected " + std::to_string(budgets.size()) + " rows, got " +
                          std::to_string(bid_matrix.size()));
  }
  const std::size_t horizon = bid_matrix.empty() ? 0 : bid_matrix.front().size();
  for (std::size_t i = 0; i < bid_matrix.size(); ++i) {
    if (bid_matrix[i].size() != horizon) {
      throw ValidationError("bids[" + std::to_string(i) + "]: ragged row, expected " + std::to_string(horizon) +
                            " rounds, got " + std::to_string(bid_matrix[i].size()));
    }
    for (Money m : bid_matrix[i]) {
      if (m < Money::zero()) throw ValidationError("bids[" + std::to_string(i) + "]: negative bid");
    }
    if (budgets[i] < Money::zero()) throw ValidationError("budgets[" + std::to_string(i) + "]: negative budget");
  }

  AuctionLedger ledger;
  ledger.initial_budget = budgets;
  ledger.remaining_budget = budgets;
  ledger.remaining_period_capacity = {unbounded_vector(1)};
  AuctionResult result;
  for (std::size_t l = 0; l < horizon; ++l) {
    std::vector<std::pair<Money, BuyerId>> live;
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      const Money amount = std::min(bid_matrix[i][l], ledger.remaining_budget[i]);
      if (amount > Money::zero()) live.emplace_back(amount, i);
    }
    std::stable_sort(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (live.size() > items_per_round) live.resize(items_per_round);

    RoundOutcome outcome;
    outcome.round = l + 1;
    for (const auto& [amount, buyer] : live) {
      outcome.winners.pairs.push_back({buyer, 0});
      outcome.winning_bids[buyer] = amount;
      outcome.payments[buyer] = amount;
      outcome.served[buyer] = {Quantity::units(1)};
      outcome.utility += amount;
    }
    outcome.winners.normalize();
    charge(ledger, outcome);
    result.per_round.push_back(std::move(outcome));
  }
  detail::finish_result(result, std::move(ledger));
  return result;
}

/// Seller's ask for a task: ask rate times the task's mean demand component
/// in whole resource units.
inline Money task_ask(Money ask_rate, const ResourceVector& demand) {
  if (demand.empty()) return ask_rate;
  __int128 total = 0;
  for (Quantity q : demand) total += q.raw();
  const __int128 denom = static_cast<__int128>(demand.size()) * Quantity::kScale;
  return Money::from_raw(static_cast<std::int64_t>(static_cast<__int128>(ask_rate.raw()) * total / denom));
}

/// Baseline double auction: buyers in descending bid order are matched to the
/// cheapest seller that can still host the task and whose ask does not exceed
/// the bid. The trade clears at the midpoint of bid and ask.
inline AuctionResult run_double_auction(const Scenario& scenario) {
  AuctionLedger ledger = new_ledger(scenario);
  for (const Seller& s : scenario.sellers) {
    if (s.asks.size() != scenario.horizon) {
      throw ValidationError("sellers[" + std::to_string(s.id) + "].asks: required by double_auction");
    }
  }
  AuctionResult result;
  for (std::size_t l = 1; l <= scenario.horizon; ++l) {
    std::vector<Bid> bids;
    for (std::size_t i = 0; i < scenario.buyers.size(); ++i) {
      Bid b = scenario.bids[i][l - 1];
      b.amount = std::min(b.amount, ledger.remaining_budget[i]);
      if (b.amount > Money::zero()) bids.push_back(std::move(b));
    }
    std::stable_sort(bids.begin(), bids.end(), [](const Bid& a, const Bid& b) { return a.amount > b.amount; });

    std::vector<SellerId> by_ask;
    for (const Seller& s : scenario.sellers) by_ask.push_back(s.id);
    std::stable_sort(by_ask.begin(), by_ask.end(), [&](SellerId a, SellerId b) {
      return scenario.sellers[a].asks[l - 1] < scenario.sellers[b].asks[l - 1];
    });
    std::vector<ResourceVector> residual;
    for (const Seller& s : scenario.sellers) residual.push_back(ledger.effective_capacity(s));

    RoundOutcome outcome;
    outcome.round = l;
    for (const Bid& b : bids) {
      for (SellerId j : by_ask) {
        if (!fits_within(b.demand, residual[j])) continue;
        const Money ask = task_ask(scenario.sellers[j].asks[l - 1], b.demand);
        if (ask > b.amount) continue;
        subtract_from(residual[j], b.demand);
        outcome.winners.pairs.push_back({b.buyer_id, j});
        outcome.winning_bids[b.buyer_id] = b.amount;
        outcome.payments[b.buyer_id] = Money::from_raw((b.amount.raw() + ask.raw()) / 2);
        outcome.served[b.buyer_id] = b.demand;
        outcome.utility += b.amount;
        break;
      }
    }
    outcome.winners.normalize();
    charge(ledger, outcome);
    result.per_round.push_back(std::move(outcome));
  }
  detail::finish_result(result, std::move(ledger));
  return result;
}

}  // namespace mdcauction
