#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mevsim/engine.hpp"

using namespace mevsim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> rounds,
            const std::string& out, bool counterfactual) {
  std::vector<Override> ov;
  if (seed) ov.push_back({"seed", std::to_string(*seed)});
  if (rounds) ov.push_back({"rounds", std::to_string(*rounds)});
  const Scenario s = parse_scenario(slurp(scenario), ov, scenario);
  const RunResult r = run_scenario(s, RunOptions{counterfactual});
  write_run(r, out);
  const auto& m = r.summary;
  std::cout << s.name << " seed " << s.seed << ": " << m.blocks << " blocks, monarch " << m.monarch.str() << ", mafia "
            << m.mafia.str() << ", moloch " << m.moloch.str();
  if (m.has_counterfactual)
    std::cout << ", welfare loss " << m.welfare_loss.str() << (m.accounts_close ? "" : " (accounts do not close)");
  std::cout << "\nfinal state " << hash_hex(m.final_hash) << ", output in " << out << '\n';
  return 0;
}

int cmd_sweep(const std::string& scenario, const std::vector<std::string>& params, std::uint64_t seeds,
              unsigned threads, const std::string& out) {
  std::vector<SweepAxis> axes;
  for (const auto& p : params) axes.push_back(parse_sweep_axis(p));
  const auto cells = run_sweep(slurp(scenario), axes, seeds, threads, scenario);
  write_sweep(cells, out);
  std::cout << cells.size() << " cells x " << seeds << " seeds, output in " << out << '\n';
  return 0;
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file");
  const ReplayResult r = replay_log(EventLog::read(in));
  std::cout << r.blocks << " blocks, " << r.penalties << " penalties, " << r.receipt_mismatches
            << " receipt mismatches\nlogged   " << hash_hex(r.logged_hash) << "\nreplayed " << hash_hex(r.replayed_hash)
            << '\n'
            << (r.ok() ? "replay matches" : "REPLAY DIVERGES") << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MEV market simulator"};
  app.require_subcommand(1);

  std::string scenario, out, log;
  std::optional<std::uint64_t> seed, rounds;
  bool no_cf = false;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--scenario", scenario, "Scenario file (YAML or JSON)")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--rounds", rounds, "Override the round count");
  run->add_option("--out", out, "Output directory")->required();
  run->add_flag("--no-counterfactual", no_cf, "Skip the adversary-free rerun (no welfare or closure figures)");

  std::vector<std::string> params;
  std::uint64_t seeds = 1;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run the cross product of parameter values");
  sweep->add_option("--scenario", scenario, "Scenario file")->required();
  sweep->add_option("--param", params, "path=v1,v2,... (repeatable)")->required();
  sweep->add_option("--seeds", seeds, "Seeds per cell, counting up from the scenario seed");
  sweep->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  sweep->add_option("--out", out, "Output directory")->required();

  auto* replay = app.add_subcommand("replay", "Re-execute an event log and compare final state hashes");
  replay->add_option("--log", log, "events.log")->required();

  auto* canon = app.add_subcommand("canon", "Print a scenario in canonical JSON form");
  canon->add_option("--scenario", scenario, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, seed, rounds, out, !no_cf);
    if (*sweep) return cmd_sweep(scenario, params, seeds, threads, out);
    if (*replay) return cmd_replay(log);
    if (*canon) {
      const Scenario s = parse_scenario(slurp(scenario), scenario);
      validate(s);
      std::cout << to_canonical_json(s);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
