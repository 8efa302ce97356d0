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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

namespace mdcauction::cli {
namespace {

using testing::fixture_path;

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mdc-auction");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("mdc_cli_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Cli, ReplayFirstTable) {
  const Invocation r = invoke({"replay", fixture_path("table1.json"), "--no-header"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "fixture: table1\n"
            "round,utility,winners\n"
            "1,9,b1 b2\n"
            "2,10,b1 b2\n"
            "3,3,b0\n"
            "4,2,b0\n"
            "5,1,b0\n"
            "6,1,b0\n"
            "total: 26\n"
            "exhaustion_rounds: never 2 2\n");
}

TEST(Cli, ReplayBothTablesReportsImprovement) {
  const Invocation r =
      invoke({"replay", fixture_path("table1.json"), fixture_path("table2.json"), "--expect", "total=34"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "total: 34\n"));
  EXPECT_TRUE(contains(r.out, "improvement: table2 vs table1: 30.77%\n"));
  EXPECT_TRUE(contains(r.out, "# mdc-auction replay\n"));
}

TEST(Cli, FailedExpectationExitsOne) {
  const Invocation r = invoke({"replay", fixture_path("table1.json"), "--expect", "total=27"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "total"));
  EXPECT_EQ(invoke({"run", fixture_path("table1_scenario.json"), "--expect", "revenue=25"}).code, 1);
}

TEST(Cli, RunScenarioMatchesReplay) {
  const Invocation r = invoke({"run", fixture_path("table1_scenario.json"), "--expect", "total=26"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "mechanism: repeated_srmra\n"));
  EXPECT_TRUE(contains(r.out, "1,9,9,b1@s0 b2@s0\n"));
  EXPECT_TRUE(contains(r.out, "total_utility: 26\n"));
  EXPECT_TRUE(contains(r.out, "exhaustion_rounds: never 2 2\n"));
  EXPECT_TRUE(contains(r.out, "remaining_budgets: 8 0 0\n"));
}

TEST(Cli, RerunsAreByteIdentical) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"run", fixture_path("generated_scenario.json"), "--no-header"},
        std::vector<std::string>{"run", fixture_path("generated_scenario.json"), "--no-header", "--mechanism",
                                 "double_auction"},
        std::vector<std::string>{"compare", fixture_path("gamma0_profile.json"), "--seeds", "5", "--no-header"},
        std::vector<std::string>{"gen", fixture_path("generated_scenario.json"), "--no-header"}}) {
    const Invocation a = invoke(args);
    const Invocation b = invoke(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
    EXPECT_FALSE(contains(a.out, "generated_at"));
  }
}

TEST(Cli, SeedOverrideIsRecorded) {
  const Invocation r = invoke({"run", fixture_path("generated_scenario.json"), "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "# seed=7\n"));
  EXPECT_TRUE(contains(r.out, "# rng=mt19937_64\n"));
  EXPECT_TRUE(contains(r.out, "seed: 7\n"));
  EXPECT_TRUE(contains(r.out, "# generated_at="));
  const Invocation other = invoke({"run", fixture_path("generated_scenario.json"), "--seed", "8", "--no-header"});
  const Invocation same = invoke({"run", fixture_path("generated_scenario.json"), "--seed", "7", "--no-header"});
  EXPECT_NE(other.out, same.out);
}

TEST(Cli, GammaZeroCompareShowsNoImprovement) {
  const Invocation r = invoke({"compare", fixture_path("gamma0_profile.json"), "--no-header"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "improvement[mafl:gamma=0 vs repeated_srmra]: 0.00%\n")) << r.out;
  EXPECT_TRUE(contains(r.out, "win_rate[mafl:gamma=0 vs repeated_srmra]: 0.000 (wins 0, ties 20, losses 0)\n"));
}

TEST(Cli, CompareWritesCsvToFile) {
  const auto path = (std::filesystem::temp_directory_path() / "mdc_cli_compare.csv").string();
  const Invocation r = invoke({"compare", fixture_path("gamma0_profile.json"), "--seeds", "3", "--out", path,
                               "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path);
  EXPECT_TRUE(contains(csv, "# seeds=3\n"));
  EXPECT_TRUE(contains(csv, "seed,mechanism,revenue,utility,allocation_ratio,exhausted_buyers,mean_exhaustion_round\n"));
  EXPECT_FALSE(contains(r.out, "seed,mechanism"));
  EXPECT_TRUE(contains(r.out, "summary_json: {"));
}

TEST(Cli, InputErrorsExitTwo) {
  Invocation r = invoke({"run", fixture_path("generated_scenario.json"), "--mechanism", "vcg"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "vcg"));

  const std::string broken = temp_file("broken.json", "{\"budgets\": [1, 2],\n \"bids\": [[1, 2]\n");
  r = invoke({"replay", broken});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, broken + ":")) << r.err;

  const std::string ragged =
      temp_file("ragged.json", R"({"budgets": [1, 2], "items_per_round": 1, "bids": [[1, 2], [3]]})");
  r = invoke({"replay", ragged});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "bids[1]: ragged row")) << r.err;

  EXPECT_EQ(invoke({"run", "/nonexistent.json"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"run", fixture_path("table1_scenario.json"), "--gamma", "-1"}).code, 2);
}

TEST(Cli, MissingAsksForDoubleAuction) {
  const Invocation r = invoke({"run", fixture_path("table1_scenario.json"), "--mechanism", "double_auction"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "asks")) << r.err;
}

TEST(Cli, GenOutputRunsLikeTheGenerator) {
  const Invocation g = invoke({"gen", fixture_path("generated_scenario.json"), "--seed", "5"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_TRUE(contains(g.out, "\"provenance\""));
  const std::string explicit_path = temp_file("explicit.json", g.out);
  EXPECT_EQ(invoke({"validate", explicit_path}).code, 2);  // provenance is not a scenario field

  const Invocation plain = invoke({"gen", fixture_path("generated_scenario.json"), "--seed", "5", "--no-header"});
  const std::string plain_path = temp_file("plain.json", plain.out);
  const Invocation a = invoke({"run", plain_path, "--no-header"});
  const Invocation b = invoke({"run", fixture_path("generated_scenario.json"), "--seed", "5", "--no-header"});
  ASSERT_EQ(a.code, 0) << a.err;
  // The generated run additionally prints its seed.
  std::string b_out = b.out;
  b_out.erase(b_out.find("seed: 5\n"), 8);
  EXPECT_EQ(a.out, b_out);
}

TEST(Cli, ValidateDetectsKinds) {
  const Invocation r = invoke({"validate", fixture_path("table1.json"), fixture_path("default_profile.json"),
                               fixture_path("table1_scenario.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "table1.json: ok (fixture)"));
  EXPECT_TRUE(contains(r.out, "default_profile.json: ok (profile)"));
  EXPECT_TRUE(contains(r.out, "table1_scenario.json: ok (scenario)"));
  EXPECT_EQ(invoke({"validate", fixture_path("table1.json"), "--kind", "scenario"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const Invocation r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "replay"));
}

}  // namespace
}  // namespace mdcauction::cli
