#include "mevsim/strategies.hpp"

#include <algorithm>
#include <string>

namespace mevsim {

std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::FrontRunCopy: return "FrontRunCopy";
    case StrategyKind::Sandwich: return "Sandwich";
    case StrategyKind::BackRun: return "BackRun";
    case StrategyKind::CrossPoolArb: return "CrossPoolArb";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view s) {
  for (auto k : {StrategyKind::FrontRunCopy, StrategyKind::Sandwich, StrategyKind::BackRun, StrategyKind::CrossPoolArb})
    if (to_string(k) == s) return k;
  throw SimError(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(s) + "'");
}

void SearcherConfig::validate() const {
  if (gas_bump.is_zero()) throw SimError(ErrorCode::InvalidArgument, "gas_bump must be positive");
}

bool SearcherConfig::watches(PoolId p) const noexcept {
  return std::find(watched_pools.begin(), watched_pools.end(), p) != watched_pools.end();
}

namespace {

constexpr TokenAmount kOneMicro = TokenAmount::from_millionths(1);

TokenAmount just_below(TokenAmount price) { return price.saturating_sub(kOneMicro); }

const std::uint64_t kSwapGas = base_gas(TxKind::Swap);

std::optional<TokenAmount> net_of(SignedAmount gross, TokenAmount gas) {
  const SignedAmount net = gross - SignedAmount::of(gas);
  if (net <= SignedAmount{}) return std::nullopt;
  return TokenAmount::from_millionths(static_cast<std::uint64_t>(net.millionths()));
}

/// True when X is strictly cheaper (in Y) on `a` than on `b`.
bool cheaper_x(const Pool& a, const Pool& b) {
  using u128 = unsigned __int128;
  return static_cast<u128>(a.reserve_y().millionths()) * b.reserve_x().millionths() <
         static_cast<u128>(b.reserve_y().millionths()) * a.reserve_x().millionths();
}

Pool after_swap(const Pool& pool, const SwapIntent& intent) {
  if (quote_swap(pool, intent.direction, intent.amount_in) < intent.min_out) return pool;
  return apply_swap(pool, intent.direction, intent.amount_in).first;
}

std::optional<RoundTrip> arb_between(const Pool& a, const Pool& b, TokenAmount budget, const Pool** buy_on,
                                     const Pool** sell_on) {
  if (cheaper_x(a, b)) {
    *buy_on = &a;
    *sell_on = &b;
  } else if (cheaper_x(b, a)) {
    *buy_on = &b;
    *sell_on = &a;
  } else {
    return std::nullopt;
  }
  return best_round_trip(**buy_on, **sell_on, budget);
}

TwoLegTrade make_legs(const Pool& buy_on, const Pool& sell_on, const RoundTrip& trip, AgentId sender,
                      TokenAmount gas_price, CraftContext ctx) {
  Transaction buy = Transaction::swap(ctx.ids.next(), sender, SwapIntent(buy_on.id(), Direction::YforX, trip.y_in),
                                      gas_price, ctx.round);
  Transaction sell = Transaction::swap(ctx.ids.next(), sender,
                                       SwapIntent(sell_on.id(), Direction::XforY, trip.x_mid, trip.y_in), gas_price,
                                       ctx.round);
  return TwoLegTrade{std::move(buy), std::move(sell), trip};
}

}  // namespace

std::vector<Opportunity> scan_opportunities(std::span<const Transaction> view, const std::map<PoolId, Pool>& pools,
                                            const SearcherConfig& config) {
  std::vector<Opportunity> found;
  for (const Transaction& tx : view) {
    if (tx.kind() != TxKind::Swap || tx.sender() == config.id) continue;
    const SwapIntent& intent = *tx.swap_intent();
    if (!config.watches(intent.pool)) continue;
    auto pit = pools.find(intent.pool);
    if (pit == pools.end()) continue;
    const Pool& pool = pit->second;

    if (config.uses(StrategyKind::Sandwich)) {
      const TokenAmount size = optimal_frontrun_size(pool, intent, config.budget);
      if (!size.is_zero()) {
        const auto outcome = simulate_sandwich(pool, intent, size);
        const TokenAmount gas = (tx.gas_price() + config.gas_bump).times(kSwapGas) + just_below(tx.gas_price()).times(kSwapGas);
        if (auto net = net_of(outcome.profit, gas))
          found.push_back(Opportunity{StrategyKind::Sandwich, tx.id(), {pool.id()}, *net, size});
      }
    }

    if (config.uses(StrategyKind::FrontRunCopy) && intent.amount_in <= config.budget) {
      // Mark the copied position to the spot price left after the victim trades.
      auto [moved, got] = apply_swap(pool, intent.direction, intent.amount_in);
      moved = after_swap(moved, intent);
      const Asset held = output_asset(intent.direction);
      const TokenAmount value =
          got.scaled(moved.reserve(input_asset(intent.direction)).millionths(), moved.reserve(held).millionths());
      const TokenAmount gas = (tx.gas_price() + config.gas_bump).times(kSwapGas);
      if (auto net = net_of(SignedAmount::diff(value, intent.amount_in), gas))
        found.push_back(Opportunity{StrategyKind::FrontRunCopy, tx.id(), {pool.id()}, *net, intent.amount_in});
    }

    if (config.uses(StrategyKind::BackRun)) {
      const Pool moved = after_swap(pool, intent);
      const TokenAmount gas = just_below(tx.gas_price()).times(2 * kSwapGas);
      std::optional<Opportunity> best;
      for (PoolId ref_id : config.watched_pools) {
        if (ref_id == pool.id()) continue;
        auto rit = pools.find(ref_id);
        if (rit == pools.end()) continue;
        const Pool* buy_on = nullptr;
        const Pool* sell_on = nullptr;
        auto trip = arb_between(moved, rit->second, config.budget, &buy_on, &sell_on);
        if (!trip) continue;
        auto net = net_of(trip->profit(), gas);
        if (net && (!best || *net > best->estimated_profit))
          best = Opportunity{StrategyKind::BackRun, tx.id(), {pool.id(), ref_id}, *net, trip->y_in};
      }
      if (best) found.push_back(*best);
    }
  }

  if (config.uses(StrategyKind::CrossPoolArb)) {
    for (std::size_t i = 0; i < config.watched_pools.size(); ++i) {
      for (std::size_t j = i + 1; j < config.watched_pools.size(); ++j) {
        auto a = pools.find(config.watched_pools[i]);
        auto b = pools.find(config.watched_pools[j]);
        if (a == pools.end() || b == pools.end()) continue;
        const Pool* buy_on = nullptr;
        const Pool* sell_on = nullptr;
        auto trip = arb_between(a->second, b->second, config.budget, &buy_on, &sell_on);
        if (!trip) continue;
        if (auto net = net_of(trip->profit(), config.gas_bump.times(2 * kSwapGas)))
          found.push_back(Opportunity{StrategyKind::CrossPoolArb, std::nullopt, {buy_on->id(), sell_on->id()}, *net,
                                      trip->y_in});
      }
    }
  }

  std::stable_sort(found.begin(), found.end(), [](const Opportunity& l, const Opportunity& r) {
    if (l.estimated_profit != r.estimated_profit) return l.estimated_profit > r.estimated_profit;
    const TxId lv = l.victim.value_or(TxId{0});
    const TxId rv = r.victim.value_or(TxId{0});
    if (lv != rv) return lv < rv;
    return l.kind < r.kind;
  });
  return found;
}

Transaction craft_frontrun_copy(const Transaction& victim, const SearcherConfig& config, CraftContext ctx) {
  if (victim.kind() != TxKind::Swap) throw SimError(ErrorCode::InvalidArgument, "front-run copy needs a swap victim");
  const SwapIntent& intent = *victim.swap_intent();
  if (intent.amount_in > config.budget)
    throw SimError(ErrorCode::BudgetExceeded, intent.amount_in.str() + " > budget " + config.budget.str());
  return Transaction::swap(ctx.ids.next(), config.id, intent, victim.gas_price() + config.gas_bump, ctx.round);
}

SandwichPlan craft_sandwich(const Transaction& victim, const Pool& pool, const SearcherConfig& config,
                            CraftContext ctx) {
  if (victim.kind() != TxKind::Swap) throw SimError(ErrorCode::InvalidArgument, "sandwich needs a swap victim");
  const SwapIntent& intent = *victim.swap_intent();
  const TokenAmount size = optimal_frontrun_size(pool, intent, config.budget);
  if (size.is_zero()) throw SimError(ErrorCode::NoProfitableSize, "victim tx " + std::to_string(victim.id().value));
  const SandwichOutcome expected = simulate_sandwich(pool, intent, size);

  Transaction front = Transaction::swap(ctx.ids.next(), config.id,
                                        SwapIntent(pool.id(), intent.direction, size, expected.front_out),
                                        victim.gas_price() + config.gas_bump, ctx.round);
  // The back leg never sells below cost, so a failed front cannot turn it into a dump.
  Transaction back = Transaction::swap(ctx.ids.next(), config.id,
                                       SwapIntent(pool.id(), reverse(intent.direction), expected.front_out, size),
                                       just_below(victim.gas_price()), ctx.round);
  return SandwichPlan{Bundle({std::move(front), victim, std::move(back)}, config.id), expected};
}

TwoLegTrade craft_backrun(const Transaction& target, const Pool& pool, const Pool& reference,
                          const SearcherConfig& config, CraftContext ctx) {
  if (target.kind() != TxKind::Swap) throw SimError(ErrorCode::NoProfit, "target has no price impact");
  const SwapIntent& intent = *target.swap_intent();
  if (intent.pool != pool.id()) throw SimError(ErrorCode::InvalidArgument, "target trades on another pool");
  const Pool after = after_swap(pool, intent);
  const Pool* buy_on = nullptr;
  const Pool* sell_on = nullptr;
  auto trip = arb_between(after, reference, config.budget, &buy_on, &sell_on);
  if (!trip) throw SimError(ErrorCode::NoProfit, "no price gap after target");
  return make_legs(*buy_on, *sell_on, *trip, config.id, just_below(target.gas_price()), ctx);
}

std::optional<TwoLegTrade> cross_pool_arbitrage(const Pool& a, const Pool& b, TokenAmount budget,
                                                const SearcherConfig& config, CraftContext ctx,
                                                TokenAmount gas_price) {
  const Pool* buy_on = nullptr;
  const Pool* sell_on = nullptr;
  auto trip = arb_between(a, b, budget, &buy_on, &sell_on);
  if (!trip) return std::nullopt;
  return make_legs(*buy_on, *sell_on, *trip, config.id, gas_price, ctx);
}

std::optional<TokenAmount> gas_auction_response(TokenAmount rival_bid, TokenAmount own_valuation,
                                                const SearcherConfig& config) {
  const TokenAmount next = rival_bid + config.gas_bump;
  if (next > own_valuation) return std::nullopt;
  return next;
}

GasAuctionResult run_gas_auction(std::vector<AuctionBidder> bidders, TokenAmount opening) {
  std::sort(bidders.begin(), bidders.end(),
            [](const AuctionBidder& l, const AuctionBidder& r) { return l.config->id < r.config->id; });
  GasAuctionResult result;
  for (const auto& b : bidders) {
    if (opening <= b.valuation) {
      result.winner = b.config->id;
      result.winning_bid = opening;
      result.history.push_back({b.config->id, opening});
      break;
    }
  }
  if (!result.winner) return result;

  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (const auto& b : bidders) {
      if (b.config->id == *result.winner) continue;
      auto& used = result.responses[b.config->id];
      if (used >= b.config->max_escalations) continue;
      if (auto bid = gas_auction_response(result.winning_bid, b.valuation, *b.config)) {
        ++used;
        result.winner = b.config->id;
        result.winning_bid = *bid;
        result.history.push_back({b.config->id, *bid});
        progressed = true;
      }
    }
  }
  return result;
}

}  // namespace mevsim
