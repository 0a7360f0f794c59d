#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "mevsim/model.hpp"
#include "mevsim/rng.hpp"

namespace mevsim {

// ---------------------------------------------------------------------------
// Regulator vs. colluding builders
// ---------------------------------------------------------------------------

struct RegulatoryRegime {
  bool active = false;
  double p_detect = 0.0;  // per colluding block
  TokenAmount penalty;    // per detected coalition member

  void validate() const;
  /// Detection probability actually in force (zero when inactive).
  double effective_p() const noexcept { return active ? p_detect : 0.0; }
};

enum class CollusionChoice : std::uint8_t { Collude, Honest };

struct CollusionVerdict {
  CollusionChoice choice;
  /// Smallest penalty that deters collusion: (c - h) / p, +inf when p = 0.
  double threshold;
};

/// Collude iff c - p * F > h, with honest profit h and collusive profit c.
/// Collusion that does not beat honesty (c <= h) is always declined.
CollusionVerdict collusion_decision(TokenAmount honest_profit, TokenAmount collusive_profit,
                                    const RegulatoryRegime& regime);

struct ColludingBlock {
  std::uint64_t height;
  std::vector<AgentId> coalition;
};

struct PenaltyAssessment {
  std::uint64_t height;
  AgentId member;
  TokenAmount amount;
};

/// Each block is detected independently with probability p_detect; a detection
/// debits every coalition member one penalty.
std::vector<PenaltyAssessment> regulator_audit(std::span<const ColludingBlock> blocks, const RegulatoryRegime& regime,
                                               Rng& rng);

struct CollusionGameResult {
  std::uint64_t rounds = 0;
  std::uint64_t colluding_rounds = 0;
  std::uint64_t detections = 0;
  TokenAmount penalties;
  double colluding_fraction() const noexcept {
    return rounds == 0 ? 0.0 : static_cast<double>(colluding_rounds) / static_cast<double>(rounds);
  }
};

/// Repeated game for one coalition: every round each member compares its
/// payoff matrix (collusion needs every member) and the regulator audits any
/// colluding block.
CollusionGameResult run_collusion_game(TokenAmount honest_profit, TokenAmount collusive_profit,
                                       const RegulatoryRegime& regime, std::size_t coalition_size,
                                       std::uint64_t rounds, Rng& rng);

// ---------------------------------------------------------------------------
// TEE-enforced random ordering
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultTeeOverheadGas = 20;

/// Uniform random permutation. Bundle spans are not preserved.
std::vector<Transaction> tee_shuffle(std::vector<Transaction> payload, Rng& rng);

/// Adds the enclave's fixed per-transaction gas overhead.
std::vector<Transaction> with_tee_overhead(std::span<const Transaction> payload, std::uint64_t overhead_gas);

/// Chance that at least one of k attacker copies lands ahead of the victim
/// under a uniform shuffle: k / (k + 1).
double spam_success_probability(std::uint64_t k);

// ---------------------------------------------------------------------------
// User-report reputation
// ---------------------------------------------------------------------------

struct ReputationEvent {
  enum class Kind : std::uint8_t { Included, UserReport } kind;
  TxId tx;
  AgentId user;  // sender of the included tx, or the reporter

  static ReputationEvent included(TxId tx, AgentId sender) { return {Kind::Included, tx, sender}; }
  static ReputationEvent report(TxId tx, AgentId reporter) { return {Kind::UserReport, tx, reporter}; }
};

class ReputationLedger {
public:
  std::uint64_t inclusions(AgentId builder) const noexcept;
  std::uint64_t reports(AgentId builder) const noexcept;
  /// (inclusions - reports + 1) / (inclusions + 2), clamped to [0, 1].
  double score(AgentId builder) const noexcept;

  /// Throws UnknownInclusion for a report on a tx this builder did not include
  /// (or from someone other than its sender) and DuplicateReport on repeats.
  void apply(AgentId builder, const ReputationEvent& event);

private:
  struct Counters {
    std::uint64_t inclusions = 0;
    std::uint64_t reports = 0;
  };
  std::map<AgentId, Counters> counters_;
  std::map<std::pair<AgentId, TxId>, AgentId> included_;  // (builder, tx) -> sender
  std::set<std::pair<AgentId, TxId>> reported_;           // (user, tx)
};

ReputationLedger reputation_update(ReputationLedger ledger, AgentId builder, const ReputationEvent& event);

// ---------------------------------------------------------------------------
// Fee escalator: extractors bid rebates to the user for the order
// ---------------------------------------------------------------------------

struct EscalatorResult {
  std::optional<AgentId> winner;
  TokenAmount rebate;
};

/// First-price sealed-bid auction over one user order.
class EscalatorAuction {
public:
  explicit EscalatorAuction(Transaction order) : order_(std::move(order)) {}

  /// Throws InvalidArgument on a second bid from the same extractor, on a bid
  /// after settlement, or on a rebate above the extractor's extractable value.
  void submit_bid(AgentId extractor, TokenAmount rebate, TokenAmount extractable_value);

  const Transaction& order() const noexcept { return order_; }
  const std::map<AgentId, TokenAmount>& bids() const noexcept { return bids_; }

  /// Highest rebate wins, lowest extractor id on ties. No bids: no winner, zero rebate.
  EscalatorResult settle();

private:
  Transaction order_;
  std::map<AgentId, TokenAmount> bids_;
  bool settled_ = false;
};

EscalatorResult fee_escalator_auction(const Transaction& order, const std::map<AgentId, TokenAmount>& bids);

}  // namespace mevsim
