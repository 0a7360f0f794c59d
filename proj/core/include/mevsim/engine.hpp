#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mevsim/event_log.hpp"
#include "mevsim/metrics.hpp"
#include "mevsim/scenario.hpp"

namespace mevsim {

/// Adversary-crafted transactions take ids from here up; users count from 1.
inline constexpr std::uint64_t kAdversaryIdBase = 1ull << 40;

struct MetricsRow {
  std::uint64_t round = 0;
  double hhi = 0.0;
  SignedAmount mev_monarch;  // cumulative
  SignedAmount mev_mafia;    // cumulative
  TokenAmount mev_moloch;    // cumulative
  SignedAmount welfare_loss_cum;
  double compliant_fraction = 1.0;
  TokenAmount gas_waste;  // this round
};

/// Per-asset balance change (actual minus counterfactual) grouped by role.
struct PartyDelta {
  SignedAmount x;
  SignedAmount y;
};

struct RunSummary {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  std::uint64_t blocks = 0;
  std::uint64_t empty_blocks = 0;
  std::uint64_t user_txs = 0;
  std::uint64_t txs_included = 0;
  std::uint64_t txs_reverted = 0;

  SignedAmount monarch;
  SignedAmount mafia;
  TokenAmount moloch;
  TokenAmount tee_overhead;
  std::uint64_t unclassifiable = 0;
  std::map<std::string, SignedAmount> extraction_by_strategy;

  bool has_counterfactual = false;
  SignedAmount welfare_loss;
  TokenAmount rebates;
  /// Counterfactual minus actual value per user tx, by tx id.
  std::map<std::uint64_t, SignedAmount> loss_by_tx;

  double hhi_final = 0.0;
  double hhi_mean = 0.0;
  KendallResult hhi_trend;
  std::map<AgentId, double> shares;

  CensorshipStats censorship;

  std::map<Role, PartyDelta> deltas;
  PartyDelta pool_delta;
  SignedAmount residual_x;
  SignedAmount residual_y;
  TokenAmount closure_slack;
  bool accounts_close = true;

  std::uint64_t colluding_blocks = 0;
  std::uint64_t detections = 0;
  TokenAmount penalties;

  std::uint64_t escalator_auctions = 0;
  std::uint64_t spam_copies = 0;
  /// Attacked victims whose first attacker leg executed before them.
  std::uint64_t attacks = 0;
  std::uint64_t attacks_front_first = 0;

  std::uint64_t reports = 0;
  std::uint64_t false_reports = 0;
  std::map<AgentId, double> reputation;
  std::map<AgentId, std::uint64_t> private_flow;

  std::uint64_t final_hash = 0;
};

struct RunResult {
  EventLog log;
  std::vector<MetricsRow> metrics;
  RunSummary summary;
  ChainState final_state;
};

struct RunOptions {
  /// Also run with every extraction strategy switched off to measure welfare
  /// loss and close the accounts.
  bool counterfactual = true;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Same scenario with searchers, self-dealing, collusion and the escalator off.
Scenario counterfactual_of(const Scenario& scenario);

std::string summary_json(const RunSummary& s);
std::string metrics_csv(std::span<const MetricsRow> rows);

/// Writes events.log, metrics.csv and summary.json.
void write_run(const RunResult& result, const std::filesystem::path& dir);

struct SweepAxis {
  std::string path;
  std::vector<std::string> values;
};

/// "path=v1,v2,v3"
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepCell {
  std::vector<Override> assignment;
  std::vector<RunSummary> runs;  // one per seed, in seed order
};

/// Runs the Cartesian product of the axes, `seeds` seeds per cell starting at
/// the scenario's seed. Cells run in parallel; results come back in cell order.
std::vector<SweepCell> run_sweep(std::string_view scenario_text, std::span<const SweepAxis> axes, std::uint64_t seeds,
                                 unsigned threads = 0, std::string_view origin = "<scenario>");

/// sweep.csv with one averaged row per cell, runs.csv with one row per seed, and
/// one summary.json per run.
void write_sweep(std::span<const SweepCell> cells, const std::filesystem::path& dir);

}  // namespace mevsim
