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

// Winner determination: choose the set of bids to accept, each buyer placed on
// at most one seller, every seller respecting its capacity in every resource
// dimension, maximizing the sum of accepted bid amounts. This is a
// multiple-choice multi-dimensional 0-1 knapsack.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mdcauction/model.hpp"

namespace mdcauction {

struct WdpInstance {
  std::size_t dimension = kDefaultDimension;
  std::vector<Bid> bids;
  /// Effective per-round capacity, indexed by seller id.
  std::vector<ResourceVector> seller_caps;
};

struct WdpSolution {
  Assignment assignment;
  Money objective;
  bool optimal = false;
};

/// Thrown by solve_exact when the node budget runs out. Carries the best
/// assignment found so far.
class SearchBudgetExceeded : public std::runtime_error {
 public:
  SearchBudgetExceeded(WdpSolution incumbent, std::uint64_t nodes)
      : std::runtime_error("search budget exceeded after " + std::to_string(nodes) + " nodes"),
        incumbent_(std::move(incumbent)) {}
  const WdpSolution& incumbent() const { return incumbent_; }

 private:
  WdpSolution incumbent_;
};

inline void validate(const WdpInstance& instance) {
  std::set<BuyerId> seen;
  for (std::size_t i = 0; i < instance.bids.size(); ++i) {
    const Bid& bid = instance.bids[i];
    const std::string field = "bids[" + std::to_string(i) + "]";
    if (!seen.insert(bid.buyer_id).second) {
      throw ValidationError(field + ": duplicate bid for buyer " + std::to_string(bid.buyer_id));
    }
    if (bid.amount < Money::zero()) throw ValidationError(field + ".amount: must be non-negative");
    detail::check_vector(bid.demand, instance.dimension, field + ".demand");
  }
  for (std::size_t j = 0; j < instance.seller_caps.size(); ++j) {
    detail::check_vector(instance.seller_caps[j], instance.dimension,
                         "seller_caps[" + std::to_string(j) + "]");
  }
}

/// True iff every buyer appears at most once and every seller's summed
/// demand fits its capacity component-wise.
inline bool check_feasible(const Assignment& assignment, const WdpInstance& instance) {
  std::map<BuyerId, const Bid*> by_buyer;
  for (const Bid& b : instance.bids) by_buyer[b.buyer_id] = &b;
  std::vector<ResourceVector> load(instance.seller_caps.size(), zero_vector(instance.dimension));
  std::set<BuyerId> seen;
  bool feasible = true;
  for (const Allocation& a : assignment.pairs) {
    auto it = by_buyer.find(a.buyer_id);
    if (it == by_buyer.end()) {
      throw ValidationError("assignment: unknown buyer " + std::to_string(a.buyer_id));
    }
    if (a.seller_id >= instance.seller_caps.size()) {
      throw ValidationError("assignment: unknown seller " + std::to_string(a.seller_id));
    }
    if (!seen.insert(a.buyer_id).second) feasible = false;
    add_into(load[a.seller_id], it->second->demand);
  }
  for (std::size_t j = 0; j < load.size(); ++j) {
    if (!fits_within(load[j], instance.seller_caps[j])) feasible = false;
  }
  return feasible;
}

inline Money objective_of(const Assignment& assignment, const WdpInstance& instance) {
  Money total;
  for (const Allocation& a : assignment.pairs) {
    for (const Bid& b : instance.bids) {
      if (b.buyer_id == a.buyer_id) total += b.amount;
    }
  }
  return total;
}

namespace detail {

/// Depth-first branch and bound. Buyers are visited in ascending id; each
/// buyer tries sellers in ascending id and then "unassigned". Only strictly
/// better leaves replace the incumbent, so among optimal assignments the
/// lexicographically first in that order wins: lower-index buyers are
/// preferred, then lower-index sellers.
class ExactSearch {
 public:
  ExactSearch(const WdpInstance& instance, std::uint64_t node_limit)
      : dim_(instance.dimension), caps_(instance.seller_caps), node_limit_(node_limit) {
    for (const Bid& b : instance.bids) {
      if (b.amount > Money::zero()) items_.push_back(&b);
    }
    std::sort(items_.begin(), items_.end(),
              [](const Bid* a, const Bid* b) { return a->buyer_id < b->buyer_id; });
    const std::size_t n = items_.size();

    placeable_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& cap : caps_) {
        if (fits_within(items_[i]->demand, cap)) placeable_[i] = true;
      }
    }
    suffix_.assign(n + 1, 0);
    for (std::size_t i = n; i-- > 0;) {
      suffix_[i] = suffix_[i + 1] + (placeable_[i] ? items_[i]->amount.raw() : 0);
    }
    // Per-dimension density orders for the fractional knapsack bound.
    by_density_.resize(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      auto& order = by_density_[k];
      for (std::size_t i = 0; i < n; ++i) {
        if (placeable_[i]) order.push_back(i);
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const __int128 lhs = static_cast<__int128>(items_[a]->amount.raw()) * items_[b]->demand[k].raw();
        const __int128 rhs = static_cast<__int128>(items_[b]->amount.raw()) * items_[a]->demand[k].raw();
        return lhs > rhs;
      });
    }
    choice_.assign(n, kUnassigned);
  }

  WdpSolution run() {
    best_value_ = 0;
    best_choice_.assign(items_.size(), kUnassigned);
    dfs(0, 0);
    return make_solution(true);
  }

 private:
  static constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

  std::int64_t bound(std::size_t depth) const {
    std::int64_t best = suffix_[depth];
    for (std::size_t k = 0; k < dim_; ++k) {
      std::int64_t room = 0;
      bool unbounded = false;
      for (const auto& cap : caps_) {
        if (cap[k].is_unbounded()) unbounded = true;
        else room += cap[k].raw();
      }
      if (unbounded) continue;
      std::int64_t value = 0;
      for (std::size_t i : by_density_[k]) {
        if (i < depth) continue;
        const std::int64_t need = items_[i]->demand[k].raw();
        if (need <= room) {
          room -= need;
          value += items_[i]->amount.raw();
        } else {
          value += static_cast<std::int64_t>(static_cast<__int128>(items_[i]->amount.raw()) * room / need);
          break;
        }
      }
      best = std::min(best, value);
    }
    return best;
  }

  void dfs(std::size_t depth, std::int64_t value) {
    if (++nodes_ > node_limit_) throw SearchBudgetExceeded(make_solution(false), nodes_);
    if (depth == items_.size()) {
      if (value > best_value_) {
        best_value_ = value;
        best_choice_ = choice_;
      }
      return;
    }
    if (value + bound(depth) <= best_value_) return;
    const Bid& bid = *items_[depth];
    if (placeable_[depth]) {
      for (std::size_t j = 0; j < caps_.size(); ++j) {
        if (!fits_within(bid.demand, caps_[j])) continue;
        subtract_from(caps_[j], bid.demand);
        choice_[depth] = j;
        dfs(depth + 1, value + bid.amount.raw());
        add_into(caps_[j], bid.demand);
      }
    }
    choice_[depth] = kUnassigned;
    dfs(depth + 1, value);
  }

  WdpSolution make_solution(bool optimal) const {
    WdpSolution sol;
    for (std::size_t i = 0; i < best_choice_.size(); ++i) {
      if (best_choice_[i] != kUnassigned) sol.assignment.pairs.push_back({items_[i]->buyer_id, best_choice_[i]});
    }
    sol.objective = Money::from_raw(best_value_);
    sol.optimal = optimal;
    return sol;
  }

  std::size_t dim_;
  std::vector<ResourceVector> caps_;
  std::uint64_t node_limit_;
  std::vector<const Bid*> items_;
  std::vector<bool> placeable_;
  std::vector<std::int64_t> suffix_;
  std::vector<std::vector<std::size_t>> by_density_;
  std::vector<std::size_t> choice_;
  std::vector<std::size_t> best_choice_;
  std::int64_t best_value_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

/// Maximum-objective feasible assignment. Exponential; meant for desk-scale
/// instances. Throws SearchBudgetExceeded past `node_limit` search nodes.
inline WdpSolution solve_exact(const WdpInstance& instance,
                               std::uint64_t node_limit = MechanismConfig{}.node_limit) {
  validate(instance);
  return detail::ExactSearch(instance, node_limit).run();
}

/// Density-ordered greedy: rank bids by amount / (1 + sum of demand
/// components normalized by total capacity), place each on the feasible
/// seller left with the largest minimum normalized slack.
inline WdpSolution solve_greedy(const WdpInstance& instance) {
  validate(instance);
  const std::size_t dim = instance.dimension;
  std::vector<long double> total(dim, 0.0L);
  std::vector<bool> unbounded(dim, false);
  for (const auto& cap : instance.seller_caps) {
    for (std::size_t k = 0; k < dim; ++k) {
      if (cap[k].is_unbounded()) unbounded[k] = true;
      else total[k] += static_cast<long double>(cap[k].raw());
    }
  }

  struct Ranked {
    const Bid* bid;
    long double density;
  };
  std::vector<Ranked> ranked;
  for (const Bid& b : instance.bids) {
    if (b.amount <= Money::zero()) continue;
    long double size = 1.0L;
    for (std::size_t k = 0; k < dim; ++k) {
      if (unbounded[k] || total[k] <= 0.0L) continue;
      size += static_cast<long double>(b.demand[k].raw()) / total[k];
    }
    ranked.push_back({&b, static_cast<long double>(b.amount.raw()) / size});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.density != b.density) return a.density > b.density;
    return a.bid->buyer_id < b.bid->buyer_id;
  });

  std::vector<ResourceVector> residual = instance.seller_caps;
  WdpSolution sol;
  for (const Ranked& r : ranked) {
    std::size_t chosen = residual.size();
    long double chosen_slack = -1.0L;
    for (std::size_t j = 0; j < residual.size(); ++j) {
      if (!fits_within(r.bid->demand, residual[j])) continue;
      long double slack = std::numeric_limits<long double>::infinity();
      for (std::size_t k = 0; k < dim; ++k) {
        const Quantity cap = instance.seller_caps[j][k];
        if (cap.is_unbounded() || cap <= Quantity::zero()) continue;
        const long double left = static_cast<long double>((residual[j][k] - r.bid->demand[k]).raw());
        slack = std::min(slack, left / static_cast<long double>(cap.raw()));
      }
      if (slack > chosen_slack) {
        chosen_slack = slack;
        chosen = j;
      }
    }
    if (chosen == residual.size()) continue;
    subtract_from(residual[chosen], r.bid->demand);
    sol.assignment.pairs.push_back({r.bid->buyer_id, chosen});
    sol.objective += r.bid->amount;
  }
  sol.assignment.normalize();
  sol.optimal = false;
  return sol;
}

inline WdpSolution solve(const WdpInstance& instance, SolverKind kind, std::uint64_t node_limit) {
  return kind == SolverKind::kExact ? solve_exact(instance, node_limit) : solve_greedy(instance);
}

}  // namespace mdcauction
