#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mevsim/amm.hpp"
#include "mevsim/model.hpp"

namespace mevsim {

enum class StrategyKind : std::uint8_t { FrontRunCopy, Sandwich, BackRun, CrossPoolArb };

std::string_view to_string(StrategyKind k) noexcept;
StrategyKind parse_strategy(std::string_view s);

struct SearcherConfig {
  AgentId id;
  std::vector<PoolId> watched_pools;
  std::set<StrategyKind> strategies;
  TokenAmount gas_bump = TokenAmount::from_millionths(1);
  std::uint32_t max_escalations = 0;
  TokenAmount budget;
  /// Extra copies of each front-run leg, sent when ordering is randomized.
  std::uint32_t spam_copies = 0;

  void validate() const;
  bool uses(StrategyKind k) const noexcept { return strategies.contains(k); }
  bool watches(PoolId p) const noexcept;
};

/// Monotone transaction id source for crafted transactions.
class IdSequence {
public:
  explicit IdSequence(std::uint64_t first) : next_(first) {}
  TxId next() noexcept { return TxId{next_++}; }
  std::uint64_t peek() const noexcept { return next_; }

private:
  std::uint64_t next_;
};

struct CraftContext {
  IdSequence& ids;
  std::uint64_t round = 0;
};

struct Opportunity {
  StrategyKind kind;
  std::optional<TxId> victim;
  std::vector<PoolId> pools;
  /// Net of the gas the searcher would pay, valued on the scanner's snapshot.
  TokenAmount estimated_profit;
  /// Front-run size for Sandwich / FrontRunCopy, Y input for BackRun / CrossPoolArb.
  TokenAmount size;

  bool operator==(const Opportunity&) const = default;
};

/// One Opportunity per profitable pending victim and strategy, plus
/// CrossPoolArb for every watched pool pair whose spot prices differ.
/// Sorted by estimated_profit descending, then victim id, then kind.
std::vector<Opportunity> scan_opportunities(std::span<const Transaction> view, const std::map<PoolId, Pool>& pools,
                                            const SearcherConfig& config);

/// Same intent as the victim, sent by the searcher with gas_price + gas_bump.
Transaction craft_frontrun_copy(const Transaction& victim, const SearcherConfig& config, CraftContext ctx);

struct SandwichPlan {
  Bundle bundle;  // [front, victim, back]
  SandwichOutcome expected;
};

/// Front leg sized by optimal_frontrun_size (capped by budget) and guarded by
/// its quoted output; back leg sells exactly the front leg's expected output.
/// Throws NoProfitableSize.
SandwichPlan craft_sandwich(const Transaction& victim, const Pool& pool, const SearcherConfig& config,
                            CraftContext ctx);

struct TwoLegTrade {
  Transaction buy;   // Y -> X on the cheaper pool
  Transaction sell;  // X -> Y on the dearer pool
  RoundTrip trip;
};

/// Arbitrage between `pool` as the target leaves it and a reference pool,
/// priced one millionth below the target so it sorts right after it. `pool`
/// is the state before the target executes. Throws NoProfit.
TwoLegTrade craft_backrun(const Transaction& target, const Pool& pool, const Pool& reference,
                          const SearcherConfig& config, CraftContext ctx);

/// Buys on the cheaper pool and sells on the dearer one, sized to the
/// profit-maximizing point (capped by budget).
std::optional<TwoLegTrade> cross_pool_arbitrage(const Pool& a, const Pool& b, TokenAmount budget,
                                                const SearcherConfig& config, CraftContext ctx,
                                                TokenAmount gas_price = {});

/// rival_bid + gas_bump if that stays within own_valuation, otherwise withdraw.
std::optional<TokenAmount> gas_auction_response(TokenAmount rival_bid, TokenAmount own_valuation,
                                                const SearcherConfig& config);

struct AuctionBidder {
  const SearcherConfig* config;
  TokenAmount valuation;  // highest gas price worth paying
};

struct GasAuctionStep {
  AgentId bidder;
  TokenAmount bid;
};

struct GasAuctionResult {
  std::optional<AgentId> winner;
  TokenAmount winning_bid;
  std::vector<GasAuctionStep> history;      // every broadcast bid, in order
  std::map<AgentId, std::uint32_t> responses;  // escalations per bidder
};

/// Priority gas auction among bots chasing one opportunity. The first bidder
/// opens at `opening`; rivals answer in id order until nobody can respond.
GasAuctionResult run_gas_auction(std::vector<AuctionBidder> bidders, TokenAmount opening);

}  // namespace mevsim
