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

// Shared test scenarios built from the two table fixtures.

#pragma once

#include <string>
#include <vector>

#include "mdcauction/model.hpp"

namespace mdcauction::testing {

inline std::string fixture_path(const std::string& name) { return std::string(MDCAUCTION_FIXTURE_DIR) + "/" + name; }

inline const std::vector<std::vector<std::int64_t>> kTable1Bids{
    {3, 4, 3, 2, 1, 1}, {4, 5, 0, 0, 0, 0}, {5, 5, 0, 0, 0, 0}};
inline const std::vector<std::vector<std::int64_t>> kTable2Bids{
    {3, 5, 4, 3, 2, 1}, {4, 2, 1, 2, 1, 1}, {5, 2, 3, 2, 2, 0}};
inline const std::vector<std::int64_t> kBudgets{15, 9, 10};

inline std::vector<std::vector<Money>> money_matrix(const std::vector<std::vector<std::int64_t>>& m) {
  std::vector<std::vector<Money>> out;
  for (const auto& row : m) {
    std::vector<Money> r;
    for (auto x : row) r.push_back(Money::units(x));
    out.push_back(r);
  }
  return out;
}

inline std::vector<Money> money_vector(const std::vector<std::int64_t>& v) {
  std::vector<Money> out;
  for (auto x : v) out.push_back(Money::units(x));
  return out;
}

/// Unit-demand scenario: one seller offering `items` units per round.
inline Scenario unit_scenario(const std::vector<std::vector<std::int64_t>>& bids, const std::vector<std::int64_t>& budgets,
                              std::int64_t items = 2) {
  Scenario s;
  s.dimension = 1;
  s.horizon = bids.empty() ? 1 : bids.front().size();
  for (std::size_t i = 0; i < budgets.size(); ++i) s.buyers.push_back({i, Money::units(budgets[i])});
  s.sellers.push_back({0, {Quantity::units(items)}, unbounded_vector(1), {}});
  for (std::size_t i = 0; i < bids.size(); ++i) {
    std::vector<Bid> row;
    for (std::size_t l = 0; l < bids[i].size(); ++l) {
      row.push_back({i, l + 1, Money::units(bids[i][l]), {Quantity::units(1)}});
    }
    s.bids.push_back(row);
  }
  return s;
}

}  // namespace mdcauction::testing
