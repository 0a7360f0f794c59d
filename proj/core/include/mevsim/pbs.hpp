#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mevsim/mempool.hpp"
#include "mevsim/model.hpp"
#include "mevsim/policy.hpp"
#include "mevsim/rng.hpp"
#include "mevsim/strategies.hpp"

namespace mevsim {

struct BuilderProfile {
  AgentId id;
  NodeId node{0};
  bool honest = true;
  bool self_dealing = false;
  bool censoring = false;
  bool colluding = false;
  std::optional<std::uint32_t> coalition;
  /// Extra ticks of propagation the builder waits for before snapshotting.
  std::uint64_t latency_advantage = 0;
  /// Share of block profit bid to the proposer.
  double payment_fraction = 0.9;
  bool tee_bound = false;
  bool accepts_private_flow = true;
  /// Capital available for the builder's own sandwich legs.
  TokenAmount budget;

  void validate() const;
};

struct RelayProfile {
  AgentId id;
  bool regulated = false;
  std::vector<AgentId> builders;
  /// Malicious-relay hook: forward this builder's block whenever it bid.
  std::optional<AgentId> favored_builder;

  bool connected(AgentId builder) const noexcept;
};

/// Per-builder order-flow counters with a (included + 1) / (received + 2) rate.
class InclusionStats {
public:
  void seed(AgentId builder, std::uint64_t received, std::uint64_t included);
  void record_received(AgentId builder, std::uint64_t n = 1);
  void record_included(AgentId builder, std::uint64_t n = 1);

  std::uint64_t received(AgentId builder) const noexcept;
  std::uint64_t included(AgentId builder) const noexcept;
  double inclusion_rate(AgentId builder) const noexcept;

private:
  struct Counters {
    std::uint64_t received = 0;
    std::uint64_t included = 0;
  };
  std::map<AgentId, Counters> counters_;
};

class SanctionsList {
public:
  SanctionsList() = default;
  explicit SanctionsList(std::set<AgentId> agents) : agents_(std::move(agents)) {}

  bool empty() const noexcept { return agents_.empty(); }
  bool is_sanctioned(AgentId a) const noexcept { return agents_.contains(a); }
  /// Sender or transfer recipient is on the list.
  bool touches(const Transaction& tx) const noexcept;
  bool touches(const Block& block) const noexcept;
  const std::set<AgentId>& agents() const noexcept { return agents_; }

private:
  std::set<AgentId> agents_;
};

struct Bid {
  AgentId builder;
  Block block;
  TokenAmount amount;
};

/// A sandwich the builder runs on its own account.
struct OwnExtraction {
  TxId front;
  TxId victim;
  TxId back;
  /// Back leg handed to a coalition partner's later block.
  bool deferred = false;
  TokenAmount estimated_profit;
};

struct BuildRequest {
  const ChainState& head;
  std::span<const Transaction> public_view;
  const Mempool& mempool;
  const SanctionsList& sanctions;
  std::uint64_t gas_limit = kDefaultGasLimit;
  /// Coalition back legs this builder promised to include first.
  std::span<const Transaction> reserved_back_legs = {};
  const RegulatoryRegime* regime = nullptr;
  std::uint64_t tee_overhead_gas = kDefaultTeeOverheadGas;
  Rng* tee_rng = nullptr;
  IdSequence* ids = nullptr;
  std::uint64_t round = 0;
};

struct BuildResult {
  Block block;
  /// Gas fees from other senders plus same-block own-sandwich gains.
  TokenAmount profit;
  TokenAmount fees;
  std::vector<OwnExtraction> extractions;
  std::optional<Transaction> deferred_back_leg;
  std::optional<CollusionVerdict> collusion;
  bool colluded = false;
};

/// Orders public transactions and private bundles by effective gas price
/// (lowest first tx id on ties), keeping bundles contiguous and skipping any
/// that would not fully succeed, then applies the profile's policy flags.
BuildResult builder_build_block(const BuilderProfile& profile, const BuildRequest& request);

/// Bundles queued for `builder`. Block building is the only reader of private flow.
std::vector<Bundle> pending_private_bundles(const Mempool& mempool, AgentId builder);

/// Regulated relays drop blocks touching sanctioned agents; the highest bid
/// wins, lowest builder id on ties.
std::optional<Bid> relay_select(std::span<const Bid> bids, const RelayProfile& relay, const SanctionsList& sanctions);

struct LocalBlock {
  Block block;
  TokenAmount profit;
};

/// Best relay offer, unless the proposer's own block is strictly more valuable.
/// Throws NothingToPropose.
Block proposer_select(std::span<const Bid> relay_offers, const std::optional<LocalBlock>& local);

enum class RoutingMode : std::uint8_t { Rate, Uniform, Reputation };
std::string_view to_string(RoutingMode m) noexcept;
RoutingMode parse_routing_mode(std::string_view s);

/// Picks the builder that receives a user's private order.
AgentId route_order_flow(std::span<const AgentId> builders, const InclusionStats& stats, RoutingMode mode, Rng& rng,
                         const ReputationLedger* reputation = nullptr, double gamma = 2.0);

enum class LegacyMode : std::uint8_t { Naive, Greedy };
std::string_view to_string(LegacyMode m) noexcept;
LegacyMode parse_legacy_mode(std::string_view s);

/// Pre-separation mining: arrival order (naive) or gas price descending
/// (greedy). The miner keeps every fee and bids nothing.
Block miner_build_legacy(std::span<const Transaction> view, LegacyMode mode, AgentId miner, const ChainState& head,
                         std::uint64_t gas_limit = kDefaultGasLimit);

}  // namespace mevsim
