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

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "mdcauction/io.hpp"
#include "mdcauction/simlab.hpp"

namespace mdcauction {
namespace {

GeneratorParams quick_params(std::uint64_t seed = 1) {
  GeneratorParams p;
  p.n_buyers = 8;
  p.m_sellers = 2;
  p.horizon = 8;
  p.seed = seed;
  return p;
}

TEST(Rng, UniformIntStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto x = rng.uniform_int(-3, 3);
    ASSERT_GE(x, -3);
    ASSERT_LE(x, 3);
    ++seen[static_cast<std::size_t>(x + 3)];
  }
  for (int c : seen) EXPECT_GT(c, 800);
  EXPECT_EQ(rng.uniform_int(5, 5), 5);
  EXPECT_THROW(rng.uniform_int(2, 1), std::invalid_argument);
}

TEST(Rng, StreamIsPinned) {
  // std::mt19937_64 is fully specified: the 10000th output of the
  // default-seeded engine is 9981545732273789042.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng a(5489);
  for (int i = 0; i < 9999; ++i) a.next();
  EXPECT_EQ(a.next(), 9981545732273789042ULL);
}

TEST(GenerateScenario, SameSeedSameBytes) {
  const std::string a = io::to_json(generate_scenario(quick_params(9))).dump();
  const std::string b = io::to_json(generate_scenario(quick_params(9))).dump();
  const std::string c = io::to_json(generate_scenario(quick_params(10))).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GenerateScenario, NoBuyersGivesZeroTotals) {
  GeneratorParams p = quick_params();
  p.n_buyers = 0;
  const Scenario s = generate_scenario(p);
  EXPECT_TRUE(s.buyers.empty());
  for (const char* m : {"mafl", "repeated_srmra", "double_auction"}) {
    const Evaluation e = evaluate(s, m);
    EXPECT_EQ(e.metrics.total_revenue, Money::zero()) << m;
    EXPECT_EQ(e.metrics.allocation_ratio, 0.0);
  }
}

TEST(GenerateScenario, RespectsRangesAndCoreInvariants) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GeneratorParams p = quick_params(seed);
    p.period_capacity = std::vector<Range>{{20, 60}};
    const Scenario s = generate_scenario(p);
    EXPECT_NO_THROW(validate(s));
    for (const Buyer& b : s.buyers) {
      EXPECT_GE(b.initial_budget, Money::units(50));
      EXPECT_LE(b.initial_budget, Money::units(200));
    }
    for (const Seller& seller : s.sellers) {
      for (Quantity q : seller.per_round_capacity) {
        EXPECT_GE(q, Quantity::units(10));
        EXPECT_LE(q, Quantity::units(30));
      }
      for (Quantity q : seller.period_capacity) {
        EXPECT_GE(q, Quantity::units(20));
        EXPECT_LE(q, Quantity::units(60));
      }
      EXPECT_EQ(seller.asks.size(), s.horizon);
    }
    for (const auto& row : s.bids) {
      for (const Bid& b : row) {
        EXPECT_GE(b.amount, Money::units(1));
        EXPECT_LE(b.amount, Money::units(20));
        for (Quantity q : b.demand) {
          EXPECT_GE(q, Quantity::units(1));
          EXPECT_LE(q, Quantity::units(5));
        }
      }
    }
  }
}

TEST(GenerateScenario, DegenerateRangesAllocateNothing) {
  GeneratorParams p = quick_params();
  p.capacity = {{0, 0}};
  const Evaluation e = evaluate(generate_scenario(p), "mafl");
  EXPECT_EQ(e.metrics.total_revenue, Money::zero());
}

TEST(GenerateScenario, InvalidRangesAreRejected) {
  GeneratorParams p = quick_params();
  p.bid = {5, 1};
  EXPECT_THROW(generate_scenario(p), ValidationError);
  p = quick_params();
  p.demand = {{1, 2}, {1, 2}};
  EXPECT_THROW(generate_scenario(p), ValidationError);
}

TEST(GenerateScenario, UnitRegimeMatchesTopTwoReplay) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GeneratorParams p;
    p.n_buyers = 3;
    p.m_sellers = 1;
    p.horizon = 6;
    p.dimension = 1;
    p.demand = {{1, 1}};
    p.capacity = {{2, 2}};
    p.budget = {5, 20};
    p.bid = {0, 6};
    p.seed = seed;
    const Scenario s = generate_scenario(p);
    std::vector<std::vector<Money>> matrix;
    std::vector<Money> budgets;
    for (std::size_t i = 0; i < s.buyers.size(); ++i) {
      budgets.push_back(s.buyers[i].initial_budget);
      std::vector<Money> row;
      for (const Bid& b : s.bids[i]) row.push_back(b.amount);
      matrix.push_back(row);
    }
    const AuctionResult a = replay(matrix, budgets, 2);
    const AuctionResult b = run_repeated_srmra(s);
    ASSERT_EQ(a.total_utility, b.total_utility);
    for (std::size_t l = 0; l < a.per_round.size(); ++l) {
      ASSERT_EQ(a.per_round[l].winners.buyers(), b.per_round[l].winners.buyers());
    }
  }
}

TEST(Evaluate, FirstTableExhaustion) {
  const Evaluation e = evaluate(testing::unit_scenario(testing::kTable1Bids, testing::kBudgets), "repeated_srmra");
  EXPECT_EQ(e.metrics.total_revenue, Money::units(26));
  EXPECT_EQ(e.metrics.exhaustion_round, (std::vector<std::optional<std::size_t>>{std::nullopt, 2, 2}));
  // 8 winner-rounds out of 18 buyer-rounds.
  EXPECT_DOUBLE_EQ(e.metrics.allocation_ratio, 8.0 / 18.0);
}

TEST(Evaluate, SecondTableReplayExhaustion) {
  // Ledger walk: u1 pays 5+4+3+2+1 = 15 (zero after round 6), u2 pays
  // 4+2+2+1 = 9 (round 6), u3 pays 5+3+2 = 10 (round 5).
  const AuctionResult r =
      replay(testing::money_matrix(testing::kTable2Bids), testing::money_vector(testing::kBudgets), 2);
  const RunMetrics m = compute_metrics(r);
  EXPECT_EQ(m.exhaustion_round, (std::vector<std::optional<std::size_t>>{6, 6, 5}));
  EXPECT_EQ(m.exhausted_count(), 3u);
}

TEST(Evaluate, EmptyScenario) {
  Scenario s;
  const Evaluation e = evaluate(s, "repeated_srmra");
  EXPECT_EQ(e.metrics.total_revenue, Money::zero());
  EXPECT_TRUE(e.metrics.exhaustion_round.empty());
  EXPECT_EQ(e.metrics.allocation_ratio, 0.0);
}

TEST(Evaluate, UnknownMechanism) {
  EXPECT_THROW(evaluate(Scenario{}, "vickrey"), ValidationError);
  EXPECT_THROW(parse_mechanism("mafl:gamma=abc"), ValidationError);
  EXPECT_THROW(parse_mechanism("repeated_srmra:gamma=1"), ValidationError);
  EXPECT_EQ(parse_mechanism("mafl:gamma=0.5").gamma, 0.5);
}

TEST(Evaluate, ZeroInitialBudgetCountsAsExhaustedAtStart) {
  const Evaluation e = evaluate(testing::unit_scenario({{3}, {2}}, {0, 5}), "repeated_srmra");
  EXPECT_EQ(e.metrics.exhaustion_round[0], std::optional<std::size_t>(0));
  EXPECT_EQ(e.metrics.exhaustion_round[1], std::nullopt);
}

TEST(Compare, GammaZeroIsExactlyNoImprovement) {
  const ComparisonReport r =
      compare(quick_params(), {parse_mechanism("mafl:gamma=0"), parse_mechanism("repeated_srmra")}, 50);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].improvement_pct, 0.0);
  EXPECT_EQ(r.pairs[0].wins, 0u);
  EXPECT_EQ(r.pairs[0].ties, 50u);
  EXPECT_EQ(r.pairs[0].win_rate, 0.0);
  EXPECT_EQ(r.pairs[0].ci_low, 0.0);
  EXPECT_EQ(r.pairs[0].ci_high, 0.0);
}

TEST(Compare, SingleSeedIntervalCollapses) {
  const ComparisonReport r = compare(quick_params(), {parse_mechanism("mafl"), parse_mechanism("repeated_srmra")}, 1);
  ASSERT_TRUE(r.pairs[0].improvement_pct);
  EXPECT_DOUBLE_EQ(*r.pairs[0].ci_low, *r.pairs[0].improvement_pct);
  EXPECT_DOUBLE_EQ(*r.pairs[0].ci_high, *r.pairs[0].improvement_pct);
}

TEST(Compare, PairedDeterminismAcrossThreadCounts) {
  const std::vector<MechanismSpec> specs{parse_mechanism("mafl"), parse_mechanism("repeated_srmra"),
                                         parse_mechanism("double_auction")};
  const ComparisonReport a = compare(quick_params(3), specs, 12, {}, {1000, 1});
  const ComparisonReport b = compare(quick_params(3), specs, 12, {}, {1000, 4});
  EXPECT_EQ(a, b);
  std::ostringstream ca, cb;
  write_csv(ca, a);
  write_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(io::summary_json(a).dump(), io::summary_json(b).dump());
}

TEST(Compare, ReportedRevenueMatchesRawPayments) {
  const std::vector<MechanismSpec> specs{parse_mechanism("mafl"), parse_mechanism("double_auction")};
  const ComparisonReport r = compare(quick_params(4), specs, 5);
  for (const SeedResult& row : r.per_seed) {
    GeneratorParams p = quick_params(4);
    p.seed = row.seed;
    const AuctionResult raw = run_mechanism(generate_scenario(p), parse_mechanism(row.mechanism));
    Money paid;
    for (const RoundOutcome& o : raw.per_round) {
      for (const auto& [buyer, amount] : o.payments) paid += amount;
    }
    EXPECT_EQ(row.metrics.total_revenue, paid);
  }
}

TEST(Compare, ImprovementFormula) {
  const ComparisonReport r = compare(quick_params(), {parse_mechanism("repeated_srmra"), parse_mechanism("mafl")}, 6);
  const double a = r.summaries[0].mean_revenue;
  const double b = r.summaries[1].mean_revenue;
  EXPECT_DOUBLE_EQ(*r.pairs[0].improvement_pct, (a - b) / b * 100.0);
  EXPECT_EQ(r.pairs[0].wins + r.pairs[0].ties + r.pairs[0].losses, 6u);
}

TEST(Compare, RejectsNoSeeds) {
  EXPECT_THROW(compare(quick_params(), {parse_mechanism("mafl")}, 0), ValidationError);
}

TEST(WriteCsv, HeaderAndRowShape) {
  const ComparisonReport r = compare(quick_params(), {parse_mechanism("mafl")}, 2);
  std::ostringstream os;
  write_csv(os, r);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("seed,mechanism,revenue,utility,allocation_ratio,exhausted_buyers,mean_exhaustion_round\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

}  // namespace
}  // namespace mdcauction
