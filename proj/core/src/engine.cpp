#include "mevsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace mevsim {

namespace {

using nlohmann::json;

struct UserTx {
  UserTx(Transaction t, std::uint64_t r, TokenAmount quote) : tx(std::move(t)), round(r), quoted_out(quote) {}
  Transaction tx;
  std::uint64_t round = 0;
  TokenAmount quoted_out;
  std::optional<AgentId> private_builder;
  bool escalated = false;
  bool sanctioned = false;
  std::optional<std::uint64_t> included_round;
  UserOutcome outcome;
};

/// One attempt to extract value, resolved when its legs land in a block.
struct Plan {
  AgentId actor;
  Role role = Role::Searcher;
  std::string strategy;
  std::optional<TxId> victim;
  std::vector<TxId> legs;
  std::vector<TxId> fronts;  // legs that must precede the victim to work
  std::optional<TxId> rebate_leg;
  /// Searcher legs are withdrawn when the round's block leaves them out.
  bool withdraw = true;
};

/// Coalition back leg waiting for a partner's block.
struct Deferred {
  Transaction leg;
  AgentId builder;
  std::uint32_t coalition = 0;
  TokenAmount front_in;
  TxId victim;
};

struct Claim {
  const SearcherSpec* spec;
  SearcherConfig config;
  Opportunity opp;
  Transaction victim_tx;
};

TokenAmount value_in_y(Asset asset, TokenAmount amount, const Pool& pool) {
  if (asset == Asset::Y) return amount;
  return amount.scaled(pool.reserve_y().millionths(), pool.reserve_x().millionths());
}

TokenAmount positive_part(SignedAmount a) {
  return a > SignedAmount{} ? TokenAmount::from_millionths(static_cast<std::uint64_t>(a.millionths())) : TokenAmount{};
}

class Engine {
public:
  Engine(const Scenario& sc, bool counterfactual)
      : sc_(sc),
        cf_(counterfactual),
        mempool_(make_topology(sc)),
        sanctions_(std::set<AgentId>(sc.policy.sanctions.begin(), sc.policy.sanctions.end())),
        user_rng_(Rng::stream(sc.seed, "users")),
        route_rng_(Rng::stream(sc.seed, "routing")),
        tee_rng_(Rng::stream(sc.seed, "tee")),
        audit_rng_(Rng::stream(sc.seed, "audit")),
        report_rng_(Rng::stream(sc.seed, "reports")),
        user_ids_(1),
        adv_ids_(kAdversaryIdBase) {}

  RunResult run();

  const std::map<TxId, UserTx>& user_txs() const noexcept { return users_; }
  const ChainState& chain() const noexcept { return chain_; }
  std::uint64_t txs_included() const noexcept { return txs_included_; }

private:
  static NetworkTopology make_topology(const Scenario& sc) {
    std::vector<NodeId> nodes;
    for (std::uint32_t i = 0; i < sc.nodes; ++i) nodes.push_back(NodeId{i});
    return NetworkTopology(std::move(nodes), sc.default_latency, sc.latency_overrides);
  }

  void log(std::uint64_t round, std::uint64_t tick, std::string type, std::optional<AgentId> actor, Fields ids = {},
           Fields amounts = {}, Fields detail = {}) {
    log_.append(LogRecord{round, tick, std::move(type), actor, std::move(ids), std::move(amounts), std::move(detail)});
  }

  void genesis();
  void submit_users(std::uint64_t round, std::uint64_t base);
  bool escalate(const Transaction& tx, std::uint64_t round, std::uint64_t tick);
  void run_searchers(std::uint64_t round, std::uint64_t base);
  void act_on_victim(TxId victim, std::vector<Claim>& claims, std::uint64_t round);
  void act_on_arb(const Claim& claim, std::uint64_t round);
  void send(const std::vector<Transaction>& txs, const SearcherSpec& spec, std::uint64_t tick, bool as_bundle);
  void produce_block(std::uint64_t round, std::uint64_t base);
  void settle_block(std::uint64_t round, std::uint64_t tick, const Block& block, const std::vector<Receipt>& receipts,
                    const std::optional<BuildResult>& winning);
  void evaluate_plan(const Plan& plan, std::uint64_t round, std::uint64_t tick,
                     const std::map<TxId, std::pair<std::size_t, const Receipt*>>& in_block, const Block& block,
                     std::map<TxId, bool>& attacked);
  void record_extraction(std::uint64_t round, std::uint64_t tick, AgentId actor, Role role, const std::string& strategy,
                         std::optional<TxId> victim, SignedAmount gain);
  Role role_of(AgentId a) const {
    auto it = roles_.find(a);
    return it == roles_.end() ? Role::User : it->second;
  }
  const BuilderSpec* builder_spec(AgentId id) const {
    for (const auto& b : sc_.builders)
      if (b.profile.id == id) return &b;
    return nullptr;
  }
  std::vector<AgentId> accepting_builders() const {
    std::vector<AgentId> out;
    for (const auto& b : sc_.builders)
      if (b.profile.accepts_private_flow) out.push_back(b.profile.id);
    return out;
  }
  std::vector<Transaction> visible(NodeId node, std::uint64_t tick) const {
    auto view = mempool_.node_view(node, tick);
    std::erase_if(view, [&](const Transaction& t) { return chain_.is_included(t.id()); });
    return view;
  }

  const Scenario& sc_;
  bool cf_;
  ChainState chain_;
  Mempool mempool_;
  InclusionStats stats_;
  ReputationLedger reputation_;
  SanctionsList sanctions_;
  Rng user_rng_, route_rng_, tee_rng_, audit_rng_, report_rng_;
  IdSequence user_ids_, adv_ids_;
  EventLog log_;
  std::map<AgentId, Role> roles_;

  std::map<TxId, UserTx> users_;
  std::vector<Plan> plans_;
  std::vector<Deferred> deferred_;
  std::set<TxId> withdraw_;
  std::map<AgentId, std::uint64_t> blocks_won_;
  std::vector<double> hhi_series_;
  std::vector<BlockCensorship> censorship_;
  std::vector<MetricsRow> rows_;

  std::uint64_t txs_included_ = 0;
  RunSummary sum_;
};

void Engine::genesis() {
  for (const auto& p : sc_.pools) {
    chain_.add_pool(Pool(p.id, p.x, p.y, p.fee_bps));
    log(0, 0, "GENESIS_POOL", std::nullopt, Fields{}.add("pool", p.id.value), Fields{}.add("x", p.x).add("y", p.y),
        Fields{}.add("fee_bps", p.fee_bps));
  }
  auto fund = [&](AgentId a, Role role, TokenAmount x, TokenAmount y) {
    roles_[a] = role;
    log(0, 0, "AGENT", a, {}, {}, Fields{}.add("role", std::string(to_string(role))));
    if (x.is_zero() && y.is_zero()) return;
    if (!x.is_zero()) chain_.credit(a, Asset::X, x);
    if (!y.is_zero()) chain_.credit(a, Asset::Y, y);
    log(0, 0, "GENESIS_BALANCE", a, {}, Fields{}.add("X", x).add("Y", y));
  };
  for (std::uint32_t i = 0; i < sc_.users.count; ++i)
    fund(sc_.users.id_at(i), Role::User, sc_.users.balance_x, sc_.users.balance_y);
  for (const auto& s : sc_.searchers) fund(s.config.id, Role::Searcher, s.balance_x, s.balance_y);
  for (const auto& b : sc_.builders) {
    fund(b.profile.id, Role::Builder, b.balance_x, b.balance_y);
    mempool_.register_builder(b.profile.id, b.profile.accepts_private_flow);
    stats_.seed(b.profile.id, b.prior_received, b.prior_included);
    blocks_won_[b.profile.id] = b.prior_blocks;
  }
  for (const auto& r : sc_.relays) fund(r.id, Role::Relay, {}, {});
  for (const auto& p : sc_.proposers) {
    fund(p.id, Role::Proposer, {}, {});
    if (sc_.mode == MarketMode::Legacy) blocks_won_[p.id] = 0;
  }
  fund(sc_.policy.regulator, Role::Regulator, {}, {});
}

void Engine::submit_users(std::uint64_t round, std::uint64_t base) {
  const auto& u = sc_.users;
  struct Order {
    std::uint64_t tick;
    AgentId user;
    PoolId pool;
    Direction dir;
    TokenAmount in;
    std::optional<TokenAmount> min_out;
    TokenAmount gas;
    bool go_private;
  };
  std::vector<Order> orders;
  for (const auto& o : u.scripted) {
    if (o.round != round) continue;
    const bool priv = o.route == Route::Private || (o.route == Route::Auto && u.private_fraction >= 1.0);
    orders.push_back(Order{o.tick, o.user, o.pool, o.direction, o.amount_in, o.min_out, o.gas_price, priv});
  }
  std::vector<PoolId> pool_choice = u.pools;
  if (pool_choice.empty())
    for (const auto& p : sc_.pools) pool_choice.push_back(p.id);
  for (std::uint32_t k = 0; k < u.swaps_per_round; ++k) {
    Order o{};
    o.user = u.id_at(static_cast<std::uint32_t>(user_rng_.below(u.count)));
    o.pool = pool_choice[static_cast<std::size_t>(user_rng_.below(pool_choice.size()))];
    o.dir = user_rng_.bernoulli(u.yforx_fraction) ? Direction::YforX : Direction::XforY;
    o.in = TokenAmount::from_millionths(user_rng_.between(u.amount_min.millionths(), u.amount_max.millionths()));
    o.gas = TokenAmount::from_millionths(user_rng_.between(u.gas_price_min.millionths(), u.gas_price_max.millionths()));
    o.tick = user_rng_.below(sc_.ticks_per_round);
    o.go_private = user_rng_.bernoulli(u.private_fraction);
    orders.push_back(o);
  }
  std::stable_sort(orders.begin(), orders.end(), [](const Order& l, const Order& r) { return l.tick < r.tick; });

  const auto builders = accepting_builders();
  for (const Order& o : orders) {
    const std::uint64_t tick = base + o.tick;
    const Pool& pool = chain_.pool(o.pool);
    const TokenAmount quote = quote_swap(pool, o.dir, o.in);
    const TokenAmount floor_out = o.min_out.value_or(quote.fraction(1.0 - u.slippage));
    const Transaction tx =
        Transaction::swap(user_ids_.next(), o.user, SwapIntent(o.pool, o.dir, o.in, floor_out), o.gas, round);

    UserTx info(tx, round, quote);
    info.sanctioned = sanctions_.is_sanctioned(o.user);
    // Drawn for every order so both runs consume the routing stream alike.
    std::optional<AgentId> target;
    if (sc_.mode == MarketMode::Pbs && !builders.empty())
      target = route_order_flow(builders, stats_, sc_.routing, route_rng_, &reputation_, sc_.policy.reputation_gamma);

    if (!cf_ && sc_.policy.escalator && escalate(tx, round, tick)) {
      info.escalated = true;
      users_.emplace(tx.id(), std::move(info));
      continue;
    }
    if (o.go_private && target) {
      mempool_.submit_private_bundle(Bundle({tx}, o.user), *target, tick);
      stats_.record_received(*target);
      sum_.private_flow[*target]++;
      info.private_builder = target;
      log(round, tick, "SUBMIT", o.user, Fields{}.add("tx", tx.id().value).add("builder", target->value), {},
          Fields{}.add("route", "private"));
    } else {
      const NodeId node{(o.user.value - u.first_id) % sc_.nodes};
      mempool_.broadcast_tx(tx, node, tick);
      log(round, tick, "SUBMIT", o.user, Fields{}.add("tx", tx.id().value).add("node", node.value), {},
          Fields{}.add("route", "public"));
    }
    users_.emplace(tx.id(), std::move(info));
  }
}

bool Engine::escalate(const Transaction& tx, std::uint64_t round, std::uint64_t tick) {
  const SwapIntent& intent = *tx.swap_intent();
  const Pool& pool = chain_.pool(intent.pool);
  const Asset paid = input_asset(intent.direction);
  EscalatorAuction auction(tx);
  std::map<AgentId, TokenAmount> budgets;
  for (AgentId e : sc_.policy.extractors) {
    const auto it = std::find_if(sc_.searchers.begin(), sc_.searchers.end(),
                                 [&](const SearcherSpec& s) { return s.config.id == e; });
    const TokenAmount budget = std::min(it->config.budget, chain_.balance(e, paid));
    const TokenAmount size = optimal_frontrun_size(pool, intent, budget);
    if (size.is_zero()) continue;
    const TokenAmount value = positive_part(simulate_sandwich(pool, intent, size).profit);
    const TokenAmount bid = value.fraction(sc_.policy.escalator_bid_fraction);
    if (bid.is_zero()) continue;
    auction.submit_bid(e, bid, value);
    budgets[e] = budget;
    log(round, tick, "BID", e, Fields{}.add("victim", tx.id().value), Fields{}.add("rebate", bid).add("value", value),
        Fields{}.add("auction", "escalator"));
  }
  const EscalatorResult won = auction.settle();
  if (!won.winner) return false;
  ++sum_.escalator_auctions;

  const auto& spec = *std::find_if(sc_.searchers.begin(), sc_.searchers.end(),
                                   [&](const SearcherSpec& s) { return s.config.id == *won.winner; });
  SearcherConfig cfg = spec.config;
  cfg.budget = budgets[*won.winner];
  SandwichPlan plan = craft_sandwich(tx, pool, cfg, CraftContext{adv_ids_, round});
  std::vector<Transaction> txs = plan.bundle.txs();
  Plan p{*won.winner, Role::Searcher, "Escalator", tx.id(), {txs[0].id(), txs[2].id()}, {txs[0].id()}, {}, false};
  if (!won.rebate.is_zero()) {
    txs.push_back(
        Transaction::transfer(adv_ids_.next(), *won.winner, TransferIntent(tx.sender(), paid, won.rebate), {}, round));
    p.rebate_leg = txs.back().id();
  }
  const Bundle bundle(std::move(txs), *won.winner);
  for (AgentId b : accepting_builders()) mempool_.submit_private_bundle(bundle, b, tick);
  plans_.push_back(std::move(p));
  log(round, tick, "SUBMIT", tx.sender(), Fields{}.add("tx", tx.id().value).add("extractor", won.winner->value),
      Fields{}.add("rebate", won.rebate), Fields{}.add("route", "escalator"));
  return true;
}

void Engine::send(const std::vector<Transaction>& txs, const SearcherSpec& spec, std::uint64_t tick, bool as_bundle) {
  if (as_bundle) {
    const Bundle bundle(txs, spec.config.id);
    for (AgentId b : accepting_builders()) mempool_.submit_private_bundle(bundle, b, tick);
  } else {
    for (const auto& t : txs) mempool_.broadcast_tx(t, spec.node, tick);
  }
  for (const auto& t : txs)
    if (t.id().value >= kAdversaryIdBase) withdraw_.insert(t.id());
}

void Engine::run_searchers(std::uint64_t round, std::uint64_t base) {
  std::map<TxId, std::vector<Claim>> by_victim;
  std::vector<Claim> arbs;
  std::map<std::pair<PoolId, PoolId>, AgentId> arb_owner;
  std::vector<const SearcherSpec*> order;
  for (const auto& s : sc_.searchers) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto* l, auto* r) { return l->config.id < r->config.id; });

  for (const SearcherSpec* spec : order) {
    if (spec->config.strategies.empty()) continue;
    auto view = visible(spec->node, base + spec->snapshot_tick);
    std::erase_if(view, [](const Transaction& t) { return t.id().value >= kAdversaryIdBase; });
    SearcherConfig cfg = spec->config;
    cfg.budget = std::min(cfg.budget, chain_.balance(cfg.id, Asset::Y));
    std::set<TxId> seen;
    bool arb_taken = false;
    for (const Opportunity& opp : scan_opportunities(view, chain_.pools(), cfg)) {
      if (opp.victim) {
        const auto vit = std::find_if(view.begin(), view.end(), [&](const Transaction& t) { return t.id() == *opp.victim; });
        // Capital has to be in the asset the front leg pays.
        const Asset pays = opp.kind == StrategyKind::BackRun ? Asset::Y : input_asset(vit->swap_intent()->direction);
        if (chain_.balance(cfg.id, pays) < opp.size) continue;
        if (!seen.insert(*opp.victim).second) continue;
        by_victim[*opp.victim].push_back(Claim{spec, cfg, opp, *vit});
      } else if (!arb_taken) {
        // Simultaneous discovery of the same gap goes to the lowest agent id.
        const auto key = std::minmax(opp.pools.at(0), opp.pools.at(1));
        auto [it, fresh] = arb_owner.emplace(key, cfg.id);
        if (fresh) {
          arb_taken = true;
          arbs.push_back(Claim{spec, cfg, opp, Transaction::noop(TxId{0}, cfg.id, {}, 0)});
        } else {
          log(round, base + spec->snapshot_tick, "COLLISION", cfg.id,
              Fields{}.add("pool_a", key.first.value).add("pool_b", key.second.value).add("winner", it->second.value),
              Fields{}, Fields{}.add("kind", "CrossPoolArb"));
          continue;
        }
      }
      log(round, base + spec->snapshot_tick, "OPPORTUNITY", cfg.id,
          opp.victim ? Fields{}.add("victim", opp.victim->value) : Fields{},
          Fields{}.add("estimate", opp.estimated_profit).add("size", opp.size),
          Fields{}.add("kind", std::string(to_string(opp.kind))));
    }
  }
  for (auto& [victim, claims] : by_victim) act_on_victim(victim, claims, round);
  for (const auto& c : arbs) act_on_arb(c, round);
}

void Engine::act_on_victim(TxId victim_id, std::vector<Claim>& claims, std::uint64_t round) {
  const bool pbs = sc_.mode == MarketMode::Pbs;
  const Transaction& victim = claims.front().victim_tx;
  const std::uint64_t front_gas = base_gas(TxKind::Swap);

  // Bots racing to lead the same victim bid up the front leg's gas price.
  std::vector<AuctionBidder> bidders;
  for (const auto& c : claims)
    if (c.opp.kind == StrategyKind::Sandwich || c.opp.kind == StrategyKind::FrontRunCopy)
      bidders.push_back(AuctionBidder{&c.config, victim.gas_price() + c.config.gas_bump +
                                                     TokenAmount::from_millionths(c.opp.estimated_profit.millionths() / front_gas)});
  std::optional<GasAuctionResult> auction;
  if (bidders.size() >= 2) {
    auto lowest = std::min_element(bidders.begin(), bidders.end(),
                                   [](const auto& l, const auto& r) { return l.config->id < r.config->id; });
    auction = run_gas_auction(bidders, victim.gas_price() + lowest->config->gas_bump);
    for (const auto& step : auction->history)
      log(round, 0, "BID", step.bidder, Fields{}.add("victim", victim_id.value), Fields{}.add("gas_price", step.bid),
          Fields{}.add("auction", "gas"));
  }

  for (auto& c : claims) {
    const SearcherSpec& spec = *c.spec;
    const std::uint64_t tick = (round - 1) * sc_.ticks_per_round + spec.snapshot_tick;
    const AgentId me = c.config.id;
    const SwapIntent& vi = *victim.swap_intent();
    CraftContext ctx{adv_ids_, round};

    std::vector<TokenAmount> prices;
    bool won = true;
    if (auction && (c.opp.kind == StrategyKind::Sandwich || c.opp.kind == StrategyKind::FrontRunCopy)) {
      for (const auto& step : auction->history)
        if (step.bidder == me) prices.push_back(step.bid);
      if (prices.empty()) continue;
      won = auction->winner == me;
    }

    try {
      Plan plan{me, Role::Searcher, std::string(to_string(c.opp.kind)), victim_id, {}, {}, {}, true};
      if (c.opp.kind == StrategyKind::Sandwich || c.opp.kind == StrategyKind::FrontRunCopy) {
        std::optional<SwapIntent> front_intent;
        std::optional<Transaction> back;
        if (c.opp.kind == StrategyKind::Sandwich) {
          SandwichPlan sp = craft_sandwich(victim, chain_.pool(vi.pool), c.config, ctx);
          front_intent = *sp.bundle.txs().front().swap_intent();
          back = sp.bundle.txs().back();
        } else {
          front_intent = *craft_frontrun_copy(victim, c.config, ctx).swap_intent();
        }
        if (prices.empty()) prices.push_back(victim.gas_price() + c.config.gas_bump);
        auto front_at = [&](TokenAmount p) { return Transaction::swap(adv_ids_.next(), me, *front_intent, p, round); };

        if (pbs) {
          // Only the final bid is worth sending as a bundle.
          std::vector<Transaction> txs{front_at(prices.back())};
          plan.fronts.push_back(txs[0].id());
          if (back) {
            txs.push_back(victim);
            txs.push_back(*back);
          }
          send(txs, spec, tick, true);
        } else {
          std::vector<Transaction> fronts;
          for (TokenAmount p : prices) fronts.push_back(front_at(p));
          for (const auto& f : fronts) plan.fronts.push_back(f.id());
          send(fronts, spec, tick, false);
          // Losing bots keep their back leg: it would only sell what they never bought.
          if (back && won) send({*back}, spec, tick, false);
        }
        if (back && (won || pbs)) plan.legs.push_back(back->id());
        // Spam copies race the victim whenever ordering is randomized.
        std::vector<Transaction> spam;
        for (std::uint32_t k = 0; k < c.config.spam_copies; ++k) spam.push_back(front_at(prices.back()));
        if (!spam.empty()) {
          send(spam, spec, tick, false);
          sum_.spam_copies += spam.size();
          for (const auto& s : spam) plan.fronts.push_back(s.id());
        }
        plan.legs.insert(plan.legs.end(), plan.fronts.begin(), plan.fronts.end());
      } else if (c.opp.kind == StrategyKind::BackRun) {
        const TwoLegTrade t = craft_backrun(victim, chain_.pool(c.opp.pools.at(0)), chain_.pool(c.opp.pools.at(1)),
                                            c.config, ctx);
        if (pbs) send({victim, t.buy, t.sell}, spec, tick, true);
        else send({t.buy, t.sell}, spec, tick, false);
        plan.legs = {t.buy.id(), t.sell.id()};
      }
      if (!plan.legs.empty()) plans_.push_back(std::move(plan));
    } catch (const SimError& e) {
      if (e.code() != ErrorCode::NoProfitableSize && e.code() != ErrorCode::NoProfit &&
          e.code() != ErrorCode::BudgetExceeded)
        throw;
    }
  }
}

void Engine::act_on_arb(const Claim& c, std::uint64_t round) {
  const SearcherSpec& spec = *c.spec;
  const std::uint64_t tick = (round - 1) * sc_.ticks_per_round + spec.snapshot_tick;
  auto t = cross_pool_arbitrage(chain_.pool(c.opp.pools.at(0)), chain_.pool(c.opp.pools.at(1)), c.config.budget,
                                c.config, CraftContext{adv_ids_, round}, c.config.gas_bump);
  if (!t) return;
  send({t->buy, t->sell}, spec, tick, sc_.mode == MarketMode::Pbs);
  plans_.push_back(Plan{c.config.id, Role::Searcher, "CrossPoolArb", std::nullopt, {t->buy.id(), t->sell.id()}, {}, {}, true});
}

void Engine::produce_block(std::uint64_t round, std::uint64_t base) {
  const std::uint64_t end_tick = base + sc_.ticks_per_round - 1;
  const ProposerSpec& proposer = sc_.proposers[(round - 1) % sc_.proposers.size()];
  std::optional<BuildResult> winning;
  std::optional<Block> chosen;

  if (sc_.mode == MarketMode::Legacy) {
    const auto view = visible(proposer.node, end_tick);
    chosen = miner_build_legacy(view, sc_.legacy_ordering, proposer.id, chain_, sc_.gas_limit);
  } else {
    std::vector<Bid> bids;
    std::map<AgentId, BuildResult> results;
    for (const auto& b : sc_.builders) {
      const auto view = visible(b.profile.node, end_tick + b.profile.latency_advantage);
      std::vector<Transaction> reserved;
      if (b.profile.colluding)
        for (const auto& d : deferred_)
          if (d.coalition == *b.profile.coalition) reserved.push_back(d.leg);
      BuildRequest req{chain_, view, mempool_, sanctions_, sc_.gas_limit, reserved, &sc_.policy.regime,
                       sc_.policy.tee_overhead_gas, &tee_rng_, &adv_ids_, round};
      BuildResult res = builder_build_block(b.profile, req);
      Fields detail = Fields{}.add("txs", res.block.payload().size()).add("colluded", res.colluded ? 1 : 0);
      if (res.collusion) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", res.collusion->threshold);
        detail.add("deterrent", std::string(buf));
      }
      log(round, end_tick, "BUILD", b.profile.id, {}, Fields{}.add("profit", res.profit).add("bid", res.block.bid()),
          std::move(detail));
      bids.push_back(Bid{b.profile.id, res.block, res.block.bid()});
      results.emplace(b.profile.id, std::move(res));
    }
    std::vector<Bid> offers;
    for (const auto& relay : sc_.relays) {
      if (auto o = relay_select(bids, relay, sanctions_)) {
        log(round, end_tick, "RELAY", relay.id, Fields{}.add("builder", o->builder.value), Fields{}.add("bid", o->amount));
        offers.push_back(std::move(*o));
      }
    }
    std::optional<LocalBlock> local;
    if (proposer.local_building) {
      Block lb = miner_build_legacy(visible(proposer.node, end_tick), LegacyMode::Greedy, proposer.id, chain_,
                                    sc_.gas_limit);
      const auto [state, receipts] = execute_block(chain_, lb);
      TokenAmount fees;
      for (const auto& r : receipts) fees += r.gas_paid;
      local = LocalBlock{std::move(lb), fees};
    }
    try {
      chosen = proposer_select(offers, local);
    } catch (const SimError& e) {
      if (e.code() != ErrorCode::NothingToPropose) throw;
      chosen = Block(chain_.height() + 1, proposer.id, sc_.gas_limit);
    }
    chosen->set_proposer(proposer.id);
    if (auto it = results.find(chosen->builder()); it != results.end() && it->second.block.payload() == chosen->payload())
      winning = it->second;
    log(round, end_tick, "PROPOSE", proposer.id, Fields{}.add("builder", chosen->builder().value),
        Fields{}.add("bid", chosen->bid()), Fields{}.add("source", winning ? "relay" : "local"));
  }

  auto [next, receipts] = execute_block(chain_, *chosen);
  const Block& block = *chosen;
  log(round, end_tick, "BLOCK", block.builder(),
      Fields{}.add("height", block.height()).add("proposer", block.proposer().value), Fields{}.add("bid", block.bid()),
      Fields{}
          .add("gas_limit", block.gas_limit())
          .add("txs", block.payload().size())
          .add("spans", block.spans().size()));
  for (std::size_t i = 0; i < receipts.size(); ++i) {
    LogRecord r = tx_record(round, block.height(), block.payload()[i], receipts[i]);
    r.tick = end_tick;
    log_.append(std::move(r));
  }
  for (const auto& s : block.spans())
    log(round, end_tick, "SPAN", std::nullopt, Fields{}.add("height", block.height()), {},
        Fields{}.add("first", s.first).add("count", s.count));
  chain_ = std::move(next);
  settle_block(round, end_tick, block, receipts, winning);
}

void Engine::record_extraction(std::uint64_t round, std::uint64_t tick, AgentId actor, Role role,
                               const std::string& strategy, std::optional<TxId> victim, SignedAmount gain) {
  std::string cls;
  try {
    const MevClass c = classify_mev_event(MevEvent{MevEvent::Kind::Extraction, role});
    cls = std::string(to_string(c));
    (c == MevClass::Monarch ? sum_.monarch : sum_.mafia) += gain;
  } catch (const SimError& e) {
    if (e.code() != ErrorCode::UnclassifiableEvent) throw;
    ++sum_.unclassifiable;
    cls = "Unclassifiable";
  }
  sum_.extraction_by_strategy[strategy] += gain;
  log(round, tick, "EXTRACT", actor, victim ? Fields{}.add("victim", victim->value) : Fields{},
      Fields{}.add("gain", gain), Fields{}.add("class", cls).add("strategy", strategy));
}

void Engine::evaluate_plan(const Plan& plan, std::uint64_t round, std::uint64_t tick,
                           const std::map<TxId, std::pair<std::size_t, const Receipt*>>& in_block, const Block& block,
                           std::map<TxId, bool>& attacked) {
  SignedAmount gain;
  bool traded = false;
  for (TxId id : plan.legs) {
    auto it = in_block.find(id);
    if (it == in_block.end() || it->second.second->status != TxStatus::Success) continue;
    const Transaction& tx = block.payload()[it->second.first];
    const SwapIntent& s = *tx.swap_intent();
    const Pool& pool = chain_.pool(s.pool);
    gain += SignedAmount::of(value_in_y(output_asset(s.direction), it->second.second->amount_out, pool));
    gain -= SignedAmount::of(value_in_y(input_asset(s.direction), s.amount_in, pool));
    traded = true;
  }
  if (plan.rebate_leg)
    if (auto it = in_block.find(*plan.rebate_leg);
        it != in_block.end() && it->second.second->status == TxStatus::Success)
      sum_.rebates += block.payload()[it->second.first].transfer_intent()->amount;
  if (traded) record_extraction(round, tick, plan.actor, plan.role, plan.strategy, plan.victim, gain);

  if (plan.victim && !plan.fronts.empty()) {
    auto v = in_block.find(*plan.victim);
    if (v != in_block.end()) {
      bool& first = attacked[*plan.victim];
      for (TxId f : plan.fronts) {
        auto it = in_block.find(f);
        if (it != in_block.end() && it->second.first < v->second.first &&
            it->second.second->status == TxStatus::Success)
          first = true;
      }
    }
  }
}

void Engine::settle_block(std::uint64_t round, std::uint64_t tick, const Block& block,
                          const std::vector<Receipt>& receipts, const std::optional<BuildResult>& winning) {
  std::map<TxId, std::pair<std::size_t, const Receipt*>> in_block;
  std::set<TxId> payload_ids;
  for (std::size_t i = 0; i < receipts.size(); ++i) {
    in_block[block.payload()[i].id()] = {i, &receipts[i]};
    payload_ids.insert(block.payload()[i].id());
  }
  ++sum_.blocks;
  if (block.payload().empty()) ++sum_.empty_blocks;

  TokenAmount waste;
  for (std::size_t i = 0; i < receipts.size(); ++i) {
    const Transaction& tx = block.payload()[i];
    const Receipt& rc = receipts[i];
    if (rc.status != TxStatus::Dropped) ++txs_included_;
    if (rc.status == TxStatus::Reverted) {
      ++sum_.txs_reverted;
      const MevClass c = classify_mev_event(MevEvent{MevEvent::Kind::Waste, role_of(tx.sender())});
      waste += rc.gas_paid;
      log(round, tick, "WASTE", tx.sender(), Fields{}.add("tx", tx.id().value), Fields{}.add("gas", rc.gas_paid),
          Fields{}.add("class", std::string(to_string(c))));
    }

    auto uit = users_.find(tx.id());
    if (uit == users_.end()) continue;
    UserTx& info = uit->second;
    info.outcome = UserOutcome{rc.status != TxStatus::Dropped, rc.status, rc.amount_out, rc.gas_paid};
    if (rc.status == TxStatus::Dropped) continue;
    info.included_round = round;
    if (info.private_builder && *info.private_builder == block.builder()) stats_.record_included(block.builder());

    if (sc_.policy.reputation && builder_spec(block.builder())) {
      reputation_.apply(block.builder(), ReputationEvent::included(tx.id(), tx.sender()));
      const double draw = report_rng_.unit();
      const bool harmed = rc.status == TxStatus::Reverted ||
                          realized_slippage(info.quoted_out, rc.amount_out) > sc_.users.report_threshold;
      if (harmed || draw < sc_.users.false_report_rate) {
        reputation_.apply(block.builder(), ReputationEvent::report(tx.id(), tx.sender()));
        ++sum_.reports;
        sum_.false_reports += !harmed;
        log(round, tick, "REPORT", tx.sender(), Fields{}.add("tx", tx.id().value).add("builder", block.builder().value),
            {}, Fields{}.add("false", harmed ? 0 : 1));
      }
    }
  }
  sum_.moloch += waste;

  if (const BuilderSpec* b = builder_spec(block.builder()); b && b->profile.tee_bound)
    for (const auto& tx : block.payload()) sum_.tee_overhead += tx.gas_price().times(sc_.policy.tee_overhead_gas);

  // Searcher and escalator plans.
  std::vector<Plan> open;
  std::map<TxId, bool> attacked;
  for (auto& plan : plans_) {
    const bool touched = std::any_of(plan.legs.begin(), plan.legs.end(), [&](TxId id) { return in_block.contains(id); });
    if (plan.withdraw || touched) evaluate_plan(plan, round, tick, in_block, block, attacked);
    else open.push_back(std::move(plan));
  }
  plans_ = std::move(open);
  for (const auto& [victim, first] : attacked) {
    ++sum_.attacks;
    sum_.attacks_front_first += first;
  }

  // Builder's own sandwiches.
  if (winning) {
    for (const auto& x : winning->extractions) {
      auto f = in_block.find(x.front);
      if (f == in_block.end() || f->second.second->status != TxStatus::Success) continue;
      const TokenAmount front_in = block.payload()[f->second.first].swap_intent()->amount_in;
      if (x.deferred) {
        if (winning->deferred_back_leg)
          deferred_.push_back(Deferred{*winning->deferred_back_leg, block.builder(),
                                       *builder_spec(block.builder())->profile.coalition, front_in, x.victim});
        continue;
      }
      auto b = in_block.find(x.back);
      if (b == in_block.end() || b->second.second->status != TxStatus::Success) continue;
      record_extraction(round, tick, block.builder(), Role::Builder, "SelfSandwich", x.victim,
                        SignedAmount::diff(b->second.second->amount_out, front_in));
    }
  }
  std::vector<Deferred> still;
  for (auto& d : deferred_) {
    auto it = in_block.find(d.leg.id());
    if (it == in_block.end()) {
      still.push_back(std::move(d));
      continue;
    }
    if (it->second.second->status == TxStatus::Success)
      record_extraction(round, tick, d.builder, Role::Builder, "CoalitionSandwich", d.victim,
                        SignedAmount::diff(it->second.second->amount_out, d.front_in));
  }
  deferred_ = std::move(still);

  if (winning && winning->colluded) {
    ++sum_.colluding_blocks;
    const std::uint32_t coalition = *builder_spec(block.builder())->profile.coalition;
    ColludingBlock cb{block.height(), {}};
    for (const auto& b : sc_.builders)
      if (b.profile.colluding && b.profile.coalition == coalition) cb.coalition.push_back(b.profile.id);
    const auto found = regulator_audit(std::span<const ColludingBlock>(&cb, 1), sc_.policy.regime, audit_rng_);
    if (!found.empty()) ++sum_.detections;
    for (const auto& a : found) {
      auto [next, taken] = collect_penalty(chain_, a.member, sc_.policy.regulator, kGasAsset, a.amount);
      chain_ = std::move(next);
      sum_.penalties += taken;
      log(round, tick, "PENALTY", a.member, Fields{}.add("height", a.height).add("to", sc_.policy.regulator.value),
          Fields{}.add("assessed", a.amount).add("taken", taken));
    }
  }

  std::set<TxId> gone = payload_ids;
  gone.insert(withdraw_.begin(), withdraw_.end());
  withdraw_.clear();
  mempool_.remove(gone);

  blocks_won_[block.builder()]++;
  const auto shares = shares_of(blocks_won_);
  hhi_series_.push_back(compute_hhi(shares));
  censorship_.push_back(BlockCensorship{block.height(), sanctions_.touches(block)});
  const auto cens = censorship_stats(censorship_, {});
  rows_.push_back(MetricsRow{round, hhi_series_.back(), sum_.monarch, sum_.mafia, sum_.moloch, {},
                             cens.compliant_fraction, waste});
}

RunResult Engine::run() {
  genesis();
  for (std::uint64_t round = 1; round <= sc_.rounds; ++round) {
    const std::uint64_t base = (round - 1) * sc_.ticks_per_round;
    submit_users(round, base);
    if (!cf_) run_searchers(round, base);
    produce_block(round, base);
  }
  sum_.final_hash = state_hash(chain_);
  log(sc_.rounds, sc_.rounds * sc_.ticks_per_round, "FINAL", std::nullopt, Fields{}.add("height", chain_.height()), {},
      Fields{}.add("hash", hash_hex(sum_.final_hash)));

  sum_.name = sc_.name;
  sum_.seed = sc_.seed;
  sum_.rounds = sc_.rounds;
  sum_.user_txs = users_.size();
  sum_.txs_included = txs_included_;
  if (!hhi_series_.empty()) {
    sum_.hhi_final = hhi_series_.back();
    double total = 0;
    for (double h : hhi_series_) total += h;
    sum_.hhi_mean = total / static_cast<double>(hhi_series_.size());
    std::vector<double> t(hhi_series_.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
    sum_.hhi_trend = kendall_tau(t, hhi_series_);
  }
  const auto shares = shares_of(blocks_won_);
  std::size_t i = 0;
  for (const auto& [id, n] : blocks_won_) sum_.shares[id] = shares[i++];

  std::vector<SanctionedTx> sanctioned;
  for (const auto& [id, u] : users_)
    if (u.sanctioned) sanctioned.push_back(SanctionedTx{u.round, u.included_round});
  sum_.censorship = censorship_stats(censorship_, sanctioned);
  for (const auto& b : sc_.builders) sum_.reputation[b.profile.id] = reputation_.score(b.profile.id);

  return RunResult{std::move(log_), std::move(rows_), std::move(sum_), chain_};
}

void close_accounts(RunResult& actual, const Engine& act, const Engine& cf, const Scenario& sc) {
  RunSummary& s = actual.summary;
  s.has_counterfactual = true;

  // Per-tx welfare, attributed to the round the tx settled in the actual run.
  std::map<std::uint64_t, SignedAmount> loss_by_round;
  for (const auto& [id, u] : act.user_txs()) {
    UserOutcome base;
    if (auto it = cf.user_txs().find(id); it != cf.user_txs().end()) base = it->second.outcome;
    const SignedAmount loss = welfare_loss(base, u.outcome);
    s.loss_by_tx[id.value] = loss;
    s.welfare_loss += loss;
    loss_by_round[u.included_round.value_or(u.round)] += loss;
  }
  SignedAmount cum;
  for (auto& row : actual.metrics) {
    cum += loss_by_round[row.round];
    row.welfare_loss_cum = cum;
  }

  // Conservation across every party, liquidity pools included.
  std::map<AgentId, Role> roles;
  for (std::uint32_t i = 0; i < sc.users.count; ++i) roles[sc.users.id_at(i)] = Role::User;
  for (const auto& x : sc.searchers) roles[x.config.id] = Role::Searcher;
  for (const auto& x : sc.builders) roles[x.profile.id] = Role::Builder;
  for (const auto& x : sc.proposers) roles[x.id] = Role::Proposer;
  roles[sc.policy.regulator] = Role::Regulator;

  std::set<BalanceKey> keys;
  for (const auto& [k, v] : act.chain().balances()) keys.insert(k);
  for (const auto& [k, v] : cf.chain().balances()) keys.insert(k);
  SignedAmount rx, ry;
  for (const auto& k : keys) {
    const SignedAmount d = SignedAmount::diff(act.chain().balance(k.agent, k.asset), cf.chain().balance(k.agent, k.asset));
    auto it = roles.find(k.agent);
    PartyDelta& pd = s.deltas[it == roles.end() ? Role::Relay : it->second];
    (k.asset == Asset::X ? pd.x : pd.y) += d;
    (k.asset == Asset::X ? rx : ry) += d;
  }
  for (const auto& [id, pool] : act.chain().pools()) {
    const Pool& base = cf.chain().pool(id);
    const SignedAmount dx = SignedAmount::diff(pool.reserve_x(), base.reserve_x());
    const SignedAmount dy = SignedAmount::diff(pool.reserve_y(), base.reserve_y());
    s.pool_delta.x += dx;
    s.pool_delta.y += dy;
    rx += dx;
    ry += dy;
  }
  s.residual_x = rx;
  s.residual_y = ry;
  const std::uint64_t n = std::max(act.txs_included(), cf.txs_included());
  s.closure_slack = TokenAmount::from_millionths((n + 999) / 1000);
  const auto within = [&](SignedAmount r) { return static_cast<std::uint64_t>(std::llabs(r.millionths())) <= s.closure_slack.millionths(); };
  s.accounts_close = within(rx) && within(ry);
}

json amount_json(SignedAmount a) { return a.str(); }
json amount_json(TokenAmount a) { return a.str(); }

}  // namespace

Scenario counterfactual_of(const Scenario& scenario) {
  Scenario s = scenario;
  for (auto& sr : s.searchers) sr.config.strategies.clear();
  for (auto& b : s.builders) {
    b.profile.self_dealing = false;
    b.profile.colluding = false;
    b.profile.coalition.reset();
    b.profile.honest = !b.profile.censoring;
  }
  s.policy.escalator = false;
  return s;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  Engine actual(scenario, false);
  RunResult result = actual.run();
  if (options.counterfactual) {
    const Scenario cf_scenario = counterfactual_of(scenario);
    Engine cf(cf_scenario, true);
    cf.run();
    close_accounts(result, actual, cf, scenario);
  }
  result.final_state = actual.chain();
  return result;
}

std::string summary_json(const RunSummary& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["rounds"] = s.rounds;
  j["final_state_hash"] = hash_hex(s.final_hash);
  j["counts"] = {{"blocks", s.blocks},
                 {"empty_blocks", s.empty_blocks},
                 {"user_txs", s.user_txs},
                 {"txs_included", s.txs_included},
                 {"txs_reverted", s.txs_reverted}};
  json by_strategy = json::object();
  for (const auto& [k, v] : s.extraction_by_strategy) by_strategy[k] = amount_json(v);
  j["mev"] = {{"monarch", amount_json(s.monarch)},
              {"mafia", amount_json(s.mafia)},
              {"moloch", amount_json(s.moloch)},
              {"total_extracted", amount_json(s.monarch + s.mafia)},
              {"tee_overhead", amount_json(s.tee_overhead)},
              {"unclassifiable", s.unclassifiable},
              {"by_strategy", by_strategy}};
  if (s.has_counterfactual) {
    json deltas = json::object();
    for (const auto& [role, d] : s.deltas)
      deltas[std::string(to_string(role))] = {{"x", amount_json(d.x)}, {"y", amount_json(d.y)}};
    deltas["Pools"] = {{"x", amount_json(s.pool_delta.x)}, {"y", amount_json(s.pool_delta.y)}};
    j["welfare"] = {{"loss", amount_json(s.welfare_loss)},
                    {"rebates", amount_json(s.rebates)},
                    {"net_user_outcome", amount_json(SignedAmount::of(s.rebates) - s.welfare_loss)}};
    j["accounting"] = {{"residual_x", amount_json(s.residual_x)},
                       {"residual_y", amount_json(s.residual_y)},
                       {"slack", amount_json(s.closure_slack)},
                       {"closes", s.accounts_close},
                       {"deltas", deltas}};
  }
  json shares = json::object();
  for (const auto& [id, v] : s.shares) shares[std::to_string(id.value)] = v;
  j["concentration"] = {{"hhi_final", s.hhi_final},
                        {"hhi_mean", s.hhi_mean},
                        {"kendall_tau", s.hhi_trend.tau},
                        {"kendall_p", s.hhi_trend.p_value},
                        {"shares", shares}};
  j["censorship"] = {{"compliant_fraction", s.censorship.compliant_fraction},
                     {"sanctioned_submitted", s.censorship.sanctioned_submitted},
                     {"sanctioned_included", s.censorship.sanctioned_included},
                     {"never_included", s.censorship.never_included},
                     {"mean_delay", s.censorship.mean_delay ? json(*s.censorship.mean_delay) : json(nullptr)}};
  j["collusion"] = {{"colluding_blocks", s.colluding_blocks},
                    {"detections", s.detections},
                    {"penalties", amount_json(s.penalties)}};
  j["ordering"] = {{"attacks", s.attacks},
                   {"front_first", s.attacks_front_first},
                   {"spam_copies", s.spam_copies},
                   {"escalator_auctions", s.escalator_auctions}};
  json rep = json::object();
  for (const auto& [id, v] : s.reputation) rep[std::to_string(id.value)] = v;
  json flow = json::object();
  for (const auto& [id, v] : s.private_flow) flow[std::to_string(id.value)] = v;
  j["reputation"] = {{"reports", s.reports}, {"false_reports", s.false_reports}, {"scores", rep}, {"private_flow", flow}};
  return j.dump(2) + "\n";
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::ostringstream out;
  out << "round,hhi,mev_monarch,mev_mafia,mev_moloch,welfare_loss_cum,compliant_fraction,gas_waste\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.hhi);
    out << r.round << ',' << buf << ',' << r.mev_monarch.str() << ',' << r.mev_mafia.str() << ','
        << r.mev_moloch.str() << ',' << r.welfare_loss_cum.str() << ',';
    std::snprintf(buf, sizeof buf, "%.6f", r.compliant_fraction);
    out << buf << ',' << r.gas_waste.str() << '\n';
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace

void write_run(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream log;
  result.log.write(log);
  write_file(dir / "events.log", log.str());
  write_file(dir / "metrics.csv", metrics_csv(result.metrics));
  write_file(dir / "summary.json", summary_json(result.summary));
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const Override ov = parse_override(text);
  SweepAxis axis{ov.path, {}};
  std::size_t start = 0;
  while (start <= ov.value.size()) {
    auto end = ov.value.find(',', start);
    if (end == std::string::npos) end = ov.value.size();
    if (end > start) axis.values.push_back(ov.value.substr(start, end - start));
    start = end + 1;
  }
  if (axis.values.empty()) throw ConfigError(axis.path, "sweep axis has no values");
  return axis;
}

std::vector<SweepCell> run_sweep(std::string_view scenario_text, std::span<const SweepAxis> axes, std::uint64_t seeds,
                                 unsigned threads, std::string_view origin) {
  if (seeds == 0) throw ConfigError("seeds", "must be at least 1");
  std::vector<SweepCell> cells(1);
  for (const auto& axis : axes) {
    std::vector<SweepCell> next;
    for (const auto& c : cells)
      for (const auto& v : axis.values) {
        SweepCell n = c;
        n.assignment.push_back(Override{axis.path, v});
        next.push_back(std::move(n));
      }
    cells = std::move(next);
  }

  // Parse everything up front so a bad cell fails before any run starts.
  std::vector<Scenario> scenarios;
  for (const auto& c : cells) scenarios.push_back(parse_scenario(scenario_text, c.assignment, origin));

  struct Job {
    std::size_t cell;
    std::uint64_t k;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].runs.resize(seeds);
    for (std::uint64_t k = 0; k < seeds; ++k) jobs.push_back({c, k});
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          Scenario s = scenarios[jobs[i].cell];
          s.seed += jobs[i].k;
          cells[jobs[i].cell].runs[jobs[i].k] = run_scenario(s).summary;
        }
      } catch (...) {
        errors[t] = std::current_exception();
        next = jobs.size();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return cells;
}

namespace {

struct RunRow {
  double monarch, mafia, moloch, welfare_loss, rebates, hhi_final, hhi_mean, compliant, colluding, penalties;
  bool closes;
};

RunRow row_of(const RunSummary& r) {
  const double blocks = r.blocks == 0 ? 1.0 : static_cast<double>(r.blocks);
  return RunRow{r.monarch.to_double(),
                r.mafia.to_double(),
                r.moloch.to_double(),
                r.welfare_loss.to_double(),
                r.rebates.to_double(),
                r.hhi_final,
                r.hhi_mean,
                r.censorship.compliant_fraction,
                static_cast<double>(r.colluding_blocks) / blocks,
                r.penalties.to_double(),
                r.accounts_close};
}

std::string format_row(const RunRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.monarch, r.mafia, r.moloch,
                r.welfare_loss, r.rebates, r.hhi_final, r.hhi_mean, r.compliant, r.colluding, r.penalties);
  return buf;
}

constexpr const char* kRowColumns =
    "monarch,mafia,moloch,welfare_loss,rebates,hhi_final,hhi_mean,compliant_fraction,colluding_fraction,penalties";

}  // namespace

void write_sweep(std::span<const SweepCell> cells, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream head;
  head << "cell";
  if (!cells.empty())
    for (const auto& a : cells.front().assignment) head << ',' << a.path;

  std::ostringstream agg, runs;
  agg << head.str() << ",seeds," << kRowColumns << ",all_close\n";
  runs << head.str() << ",seed," << kRowColumns << ",accounts_close,final_state_hash\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::ostringstream key;
    key << c;
    for (const auto& a : cells[c].assignment) key << ',' << a.value;

    RunRow mean{};
    bool all_close = true;
    for (const auto& r : cells[c].runs) {
      const RunRow row = row_of(r);
      runs << key.str() << ',' << r.seed << ',' << format_row(row) << ',' << (row.closes ? 1 : 0) << ','
           << hash_hex(r.final_hash) << '\n';
      mean.monarch += row.monarch;
      mean.mafia += row.mafia;
      mean.moloch += row.moloch;
      mean.welfare_loss += row.welfare_loss;
      mean.rebates += row.rebates;
      mean.hhi_final += row.hhi_final;
      mean.hhi_mean += row.hhi_mean;
      mean.compliant += row.compliant;
      mean.colluding += row.colluding;
      mean.penalties += row.penalties;
      all_close = all_close && row.closes;

      const auto sub = dir / ("cell_" + std::to_string(c));
      std::filesystem::create_directories(sub);
      write_file(sub / ("seed_" + std::to_string(r.seed) + ".json"), summary_json(r));
    }
    const double n = cells[c].runs.empty() ? 1.0 : static_cast<double>(cells[c].runs.size());
    for (double* f : {&mean.monarch, &mean.mafia, &mean.moloch, &mean.welfare_loss, &mean.rebates, &mean.hhi_final,
                      &mean.hhi_mean, &mean.compliant, &mean.colluding, &mean.penalties})
      *f /= n;
    agg << key.str() << ',' << cells[c].runs.size() << ',' << format_row(mean) << ',' << (all_close ? 1 : 0) << '\n';
  }
  write_file(dir / "sweep.csv", agg.str());
  write_file(dir / "runs.csv", runs.str());
}

}  // namespace mevsim
