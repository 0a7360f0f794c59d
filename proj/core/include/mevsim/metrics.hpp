#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mevsim/model.hpp"

namespace mevsim {

/// Herfindahl-Hirschman index, sum of squared shares. Shares must be
/// non-negative and sum to 1 within 1e-9, otherwise BadShares.
double compute_hhi(std::span<const double> shares);

/// Shares from raw counts in key order; all-zero counts give equal shares.
std::vector<double> shares_of(const std::map<AgentId, std::uint64_t>& counts);

enum class MevClass : std::uint8_t { Monarch, Mafia, Moloch };
std::string_view to_string(MevClass c) noexcept;

enum class Role : std::uint8_t { User, Searcher, Builder, Proposer, Relay, Regulator };
std::string_view to_string(Role r) noexcept;

struct MevEvent {
  enum class Kind : std::uint8_t { Extraction, Waste } kind;
  Role actor;
};

/// Builder extraction is Monarch, searcher extraction is Mafia, burned gas is
/// Moloch whoever paid it. Anything else throws UnclassifiableEvent.
MevClass classify_mev_event(const MevEvent& e);

struct BlockCensorship {
  std::uint64_t height;
  bool touches_sanctioned;
};

struct SanctionedTx {
  std::uint64_t submitted_round;
  std::optional<std::uint64_t> included_round;
};

struct CensorshipStats {
  /// Share of blocks with no sanctioned-agent transaction; 1 when there are no blocks.
  double compliant_fraction = 1.0;
  std::uint64_t sanctioned_submitted = 0;
  std::uint64_t sanctioned_included = 0;
  std::uint64_t never_included = 0;
  /// Mean rounds from submission to inclusion over included sanctioned txs.
  std::optional<double> mean_delay;
};

CensorshipStats censorship_stats(std::span<const BlockCensorship> blocks, std::span<const SanctionedTx> txs);

/// A user transaction's fate in one run.
struct UserOutcome {
  bool included = false;
  TxStatus status = TxStatus::Dropped;
  TokenAmount amount_out;
  TokenAmount gas_paid;
};

/// Counterfactual minus actual, in the tx's output asset plus gas (Y) at par.
/// The output term only applies when both runs executed the swap; a revert or
/// exclusion in the actual run costs only the gas difference.
SignedAmount welfare_loss(const UserOutcome& counterfactual, const UserOutcome& actual);

struct KendallResult {
  double tau = 0.0;  // tau-b
  double z = 0.0;
  double p_value = 1.0;  // two-sided, normal approximation with tie correction
};

KendallResult kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace mevsim
