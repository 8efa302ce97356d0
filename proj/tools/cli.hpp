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

// mdc-auction command line. Kept in a header so tests can drive it in-process.
//
// Exit codes: 0 success, 1 expectation failure, 2 input error, 3 internal
// invariant violation.

#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mdcauction/io.hpp"
#include "mdcauction/mechanisms.hpp"
#include "mdcauction/simlab.hpp"

namespace mdcauction::cli {

inline constexpr int kOk = 0;
inline constexpr int kExpectationFailed = 1;
inline constexpr int kInputError = 2;
inline constexpr int kInternalError = 3;

struct Options {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<std::string> mechanism;
  std::optional<double> gamma;
  std::optional<std::string> solver;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> expect;
  std::optional<std::string> out;
  std::optional<std::string> kind;
  std::size_t threads = 0;
  bool no_header = false;
};

namespace detail {

inline std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void header(std::ostream& os, const Options& opt, const std::vector<std::string>& lines) {
  if (opt.no_header) return;
  os << "# mdc-auction " << opt.command << '\n';
  for (const auto& l : lines) os << "# " << l << '\n';
  os << "# generated_at=" << timestamp() << '\n';
}

inline std::string winners_text(const RoundOutcome& o) {
  std::string s;
  for (const Allocation& a : o.winners.pairs) {
    if (!s.empty()) s += ' ';
    s += "b" + std::to_string(a.buyer_id) + "@s" + std::to_string(a.seller_id);
  }
  return s;
}

/// "total=26" style expectations against named totals.
inline bool check_expectations(const std::vector<std::string>& expect, const std::map<std::string, Money>& totals,
                               std::ostream& err) {
  bool ok = true;
  for (const std::string& e : expect) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw ValidationError("--expect: expected key=value, got '" + e + "'");
    const std::string key = e.substr(0, eq);
    auto it = totals.find(key);
    if (it == totals.end()) throw ValidationError("--expect: unknown key '" + key + "'");
    Money want;
    try {
      std::size_t used = 0;
      const double v = std::stod(e.substr(eq + 1), &used);
      if (used != e.size() - eq - 1) throw std::invalid_argument(e);
      want = Money::from_double(v);
    } catch (const std::exception&) {
      throw ValidationError("--expect: invalid number in '" + e + "'");
    }
    if (it->second != want) {
      err << "expectation failed: " << key << " is " << it->second << ", expected " << want << '\n';
      ok = false;
    }
  }
  return ok;
}

class Output {
 public:
  Output(const Options& opt, std::ostream& fallback) : out_(&fallback) {
    if (opt.out) {
      file_.open(*opt.out, std::ios::binary | std::ios::trunc);
      if (!file_) throw ValidationError("--out: cannot open " + *opt.out);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline void apply_overrides(MechanismConfig& config, const Options& opt) {
  if (opt.gamma) {
    if (*opt.gamma < 0.0) throw ValidationError("--gamma: must be non-negative");
    config.gamma = *opt.gamma;
  }
  if (opt.solver) {
    if (*opt.solver == "exact") config.solver = SolverKind::kExact;
    else if (*opt.solver == "greedy") config.solver = SolverKind::kGreedy;
    else throw ValidationError("--solver: expected exact or greedy");
  }
}

inline int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.inputs.size() != 1) throw ValidationError("run: expected exactly one scenario file");
  io::LoadedScenario loaded = io::load_scenario(opt.inputs[0], opt.seed);
  apply_overrides(loaded.scenario.mechanism, opt);
  const std::string mech_name = opt.mechanism.value_or(loaded.mechanism_name.value_or("mafl"));
  const MechanismSpec spec = parse_mechanism(mech_name);
  const Evaluation eval = evaluate(loaded.scenario, spec);
  const Scenario& s = loaded.scenario;

  Output sink(opt, out);
  std::ostream& os = sink.stream();
  std::vector<std::string> hdr{"input=" + opt.inputs[0], "mechanism=" + spec.label};
  if (s.seed) {
    hdr.push_back("seed=" + std::to_string(*s.seed));
    hdr.push_back(std::string("rng=") + Rng::kName);
  }
  header(os, opt, hdr);

  os << "mechanism: " << spec.label << '\n';
  os << "gamma: " << format_double(spec.gamma.value_or(s.mechanism.gamma), 3) << '\n';
  os << "solver: " << (s.mechanism.solver == SolverKind::kExact ? "exact" : "greedy") << '\n';
  os << "pricing: " << (s.mechanism.pricing == Pricing::kFirstPrice ? "first_price" : "critical_value") << '\n';
  if (s.seed) os << "seed: " << *s.seed << '\n';
  os << "buyers: " << s.buyers.size() << '\n';
  os << "sellers: " << s.sellers.size() << '\n';
  os << "horizon: " << s.horizon << '\n';
  os << "round,utility,revenue,winners\n";
  for (const RoundOutcome& o : eval.result.per_round) {
    os << o.round << ',' << o.utility << ',' << o.revenue() << ',' << winners_text(o) << '\n';
  }
  os << "total_utility: " << eval.metrics.total_utility << '\n';
  os << "total_revenue: " << eval.metrics.total_revenue << '\n';
  os << "allocation_ratio: " << format_double(eval.metrics.allocation_ratio) << '\n';
  os << "exhaustion_rounds:";
  for (const auto& r : eval.metrics.exhaustion_round) os << ' ' << format_exhaustion(r);
  os << '\n';
  os << "remaining_budgets:";
  for (Money m : eval.result.final_ledger.remaining_budget) os << ' ' << m;
  os << '\n';
  os.flush();

  const bool ok = check_expectations(
      opt.expect, {{"total", eval.metrics.total_utility}, {"revenue", eval.metrics.total_revenue}}, err);
  return ok ? kOk : kExpectationFailed;
}

inline int cmd_replay(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.inputs.empty()) throw ValidationError("replay: expected at least one fixture file");
  std::vector<io::ReplayFixture> fixtures;
  for (const auto& path : opt.inputs) {
    try {
      fixtures.push_back(io::load_fixture(path));
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      throw ValidationError(what.rfind(path, 0) == 0 ? what : path + ": " + what);
    }
  }

  Output sink(opt, out);
  std::ostream& os = sink.stream();
  std::vector<std::string> hdr;
  for (const auto& p : opt.inputs) hdr.push_back("input=" + p);
  header(os, opt, hdr);

  std::vector<Money> totals;
  for (const auto& f : fixtures) {
    const AuctionResult r = replay(f.bids, f.budgets, f.items_per_round);
    const RunMetrics m = compute_metrics(r);
    os << "fixture: " << f.name << '\n';
    os << "round,utility,winners\n";
    for (const RoundOutcome& o : r.per_round) {
      std::string w;
      for (BuyerId b : o.winners.buyers()) w += (w.empty() ? "b" : " b") + std::to_string(b);
      os << o.round << ',' << o.utility << ',' << w << '\n';
    }
    os << "total: " << r.total_utility << '\n';
    os << "exhaustion_rounds:";
    for (const auto& e : m.exhaustion_round) os << ' ' << format_exhaustion(e);
    os << '\n';
    totals.push_back(r.total_utility);
  }
  if (fixtures.size() >= 2) {
    const Money base = totals.front();
    for (std::size_t i = 1; i < fixtures.size(); ++i) {
      os << "improvement: " << fixtures[i].name << " vs " << fixtures.front().name << ": ";
      if (base == Money::zero()) {
        os << "undefined\n";
      } else {
        const double pct = (totals[i].to_double() / base.to_double() - 1.0) * 100.0;
        os << format_double(pct, 2) << "%\n";
      }
    }
  }
  os.flush();
  return check_expectations(opt.expect, {{"total", totals.back()}}, err) ? kOk : kExpectationFailed;
}

inline io::Profile profile_from(const Options& opt) {
  io::Profile profile;
  if (!opt.inputs.empty()) {
    if (opt.inputs.size() != 1) throw ValidationError("expected at most one profile file");
    profile = io::load_profile(opt.inputs[0]);
  }
  apply_overrides(profile.mechanism, opt);
  if (opt.seed) profile.generator.seed = *opt.seed;
  if (opt.seeds) profile.seeds = *opt.seeds;
  if (opt.mechanism) {
    profile.mechanisms.clear();
    std::stringstream ss(*opt.mechanism);
    for (std::string item; std::getline(ss, item, ',');) profile.mechanisms.push_back(item);
  }
  return profile;
}

inline int cmd_compare(const Options& opt, std::ostream& out, std::ostream&) {
  const io::Profile profile = profile_from(opt);
  std::vector<MechanismSpec> specs;
  for (const auto& m : profile.mechanisms) specs.push_back(parse_mechanism(m));
  CompareOptions copt;
  copt.threads = opt.threads;
  const ComparisonReport report = compare(profile.generator, specs, profile.seeds, profile.mechanism, copt);

  std::vector<std::string> hdr{"seed=" + std::to_string(profile.generator.seed), "seeds=" + std::to_string(profile.seeds),
                               std::string("rng=") + Rng::kName};
  if (!opt.inputs.empty()) hdr.insert(hdr.begin(), "input=" + opt.inputs[0]);

  if (opt.out) {
    Output sink(opt, out);
    header(sink.stream(), opt, hdr);
    write_csv(sink.stream(), report);
  } else {
    header(out, opt, hdr);
    write_csv(out, report);
    out << '\n';
  }
  out << "base_seed: " << report.base_seed << '\n';
  out << "seeds: " << report.n_seeds << '\n';
  out << "rng: " << Rng::kName << '\n';
  for (const auto& m : report.summaries) {
    out << "mean_revenue[" << m.mechanism << "]: " << format_double(m.mean_revenue, 3) << '\n';
    out << "median_revenue[" << m.mechanism << "]: " << format_double(m.median_revenue, 3) << '\n';
  }
  auto pct = [](const std::optional<double>& v) { return v ? format_double(*v, 2) + "%" : std::string("undefined"); };
  for (const auto& p : report.pairs) {
    const std::string key = p.a + " vs " + p.b;
    out << "improvement[" << key << "]: " << pct(p.improvement_pct) << '\n';
    out << "ci95[" << key << "]: " << pct(p.ci_low) << " .. " << pct(p.ci_high) << '\n';
    out << "win_rate[" << key << "]: " << format_double(p.win_rate, 3) << " (wins " << p.wins << ", ties " << p.ties
        << ", losses " << p.losses << ")\n";
  }
  out << "summary_json: " << io::summary_json(report).dump() << '\n';
  return kOk;
}

inline int cmd_gen(const Options& opt, std::ostream& out, std::ostream&) {
  io::Profile profile;
  std::optional<std::string> name;
  if (!opt.inputs.empty()) {
    if (opt.inputs.size() != 1) throw ValidationError("gen: expected at most one input file");
    const io::json root = io::read_json_file(opt.inputs[0]);
    if (root.is_object() && (root.contains("bids") || root.contains("buyers"))) {
      throw ValidationError("gen: input already holds an explicit scenario");
    }
    if (root.is_object() && root.contains("generator") && !root.contains("seeds") && !root.contains("mechanisms")) {
      io::LoadedScenario loaded = io::parse_scenario(root, opt.seed);
      profile.generator = *loaded.generator;
      profile.mechanism = loaded.scenario.mechanism;
      name = loaded.mechanism_name;
    } else {
      profile = io::parse_profile(root);
    }
  }
  apply_overrides(profile.mechanism, opt);
  if (opt.seed) profile.generator.seed = *opt.seed;
  if (opt.mechanism) name = opt.mechanism;
  const Scenario s = generate_scenario(profile.generator, profile.mechanism);
  io::json j = io::to_json(s, name);
  Output sink(opt, out);
  std::ostream& os = sink.stream();
  if (!opt.no_header) {
    // JSON has no comments; provenance goes in a field.
    j["provenance"] = {{"seed", profile.generator.seed}, {"rng", Rng::kName}, {"generated_at", timestamp()}};
  }
  os << j.dump(2) << '\n';
  return kOk;
}

inline int cmd_validate(const Options& opt, std::ostream& out, std::ostream&) {
  if (opt.inputs.empty()) throw ValidationError("validate: expected at least one file");
  for (const auto& path : opt.inputs) {
    const io::json root = io::read_json_file(path);
    std::string kind = opt.kind.value_or("");
    if (kind.empty()) {
      if (root.is_object() && root.contains("items_per_round")) kind = "fixture";
      else if (root.is_object() && (root.contains("seeds") || root.contains("mechanisms"))) kind = "profile";
      else kind = "scenario";
    }
    try {
      if (kind == "fixture") io::parse_fixture(root, path);
      else if (kind == "profile") io::parse_profile(root);
      else if (kind == "scenario") io::parse_scenario(root, opt.seed);
      else throw ValidationError("--kind: expected scenario, fixture or profile");
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
    out << path << ": ok (" << kind << ")\n";
  }
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Budget-constrained multi-round resource auctions for mobile device clouds"};
  app.require_subcommand(1, 1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Write the report to PATH instead of stdout");
    sub->add_flag("--no-header", opt.no_header, "Omit the provenance/timestamp header");
  };
  auto add_mechanism = [&](CLI::App* sub) {
    sub->add_option("--mechanism", opt.mechanism, "mafl, mafl:gamma=G, repeated_srmra or double_auction");
    sub->add_option("--gamma", opt.gamma, "Bid adjustment exponent");
    sub->add_option("--solver", opt.solver, "Winner determination solver: exact or greedy");
    sub->add_option("--seed", opt.seed, "Generator seed override");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Run one mechanism on a scenario file");
  run_cmd->add_option("scenario", opt.inputs, "Scenario JSON")->required();
  add_mechanism(run_cmd);
  run_cmd->add_option("--expect", opt.expect, "Fail with exit 1 unless total=N / revenue=N")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_common(run_cmd);

  CLI::App* replay_cmd = app.add_subcommand("replay", "Replay table fixtures (top-k unit auctions)");
  replay_cmd->add_option("fixtures", opt.inputs, "Fixture JSON files")->required();
  replay_cmd->add_option("--expect", opt.expect, "Fail with exit 1 unless total=N (last fixture)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_common(replay_cmd);

  CLI::App* compare_cmd = app.add_subcommand("compare", "Paired multi-seed comparison of mechanisms");
  compare_cmd->add_option("profile", opt.inputs, "Experiment profile JSON (defaults when omitted)");
  add_mechanism(compare_cmd);
  compare_cmd->add_option("--seeds", opt.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  add_common(compare_cmd);

  CLI::App* gen_cmd = app.add_subcommand("gen", "Materialize a generated scenario as explicit JSON");
  gen_cmd->add_option("input", opt.inputs, "Profile or generator scenario JSON");
  add_mechanism(gen_cmd);
  add_common(gen_cmd);

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check scenario, fixture or profile files");
  validate_cmd->add_option("files", opt.inputs, "Files to check")->required();
  validate_cmd->add_option("--kind", opt.kind, "scenario, fixture or profile (auto-detected when omitted)");
  validate_cmd->add_option("--seed", opt.seed, "Generator seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    if (opt.command == "run") return detail::cmd_run(opt, out, err);
    if (opt.command == "replay") return detail::cmd_replay(opt, out, err);
    if (opt.command == "compare") return detail::cmd_compare(opt, out, err);
    if (opt.command == "gen") return detail::cmd_gen(opt, out, err);
    return detail::cmd_validate(opt, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const SearchBudgetExceeded& e) {
    err << "error: " << e.what() << " (raise mechanism.node_limit or use --solver greedy)\n";
    return kInputError;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace mdcauction::cli
