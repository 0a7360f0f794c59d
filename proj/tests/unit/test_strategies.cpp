#include "doctest.h"

#include <random>

#include "../oracle.hpp"
#include "mevsim/strategies.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

constexpr AgentId kUser{10};
constexpr AgentId kBot{20};

const Pool kA(PoolId{1}, 1000_tok, 1000_tok);
const Pool kB(PoolId{2}, 800_tok, 1250_tok);

SearcherConfig bot(std::set<StrategyKind> kinds, TokenAmount budget = 1'000'000_tok) {
  SearcherConfig c;
  c.id = kBot;
  c.watched_pools = {PoolId{1}, PoolId{2}};
  c.strategies = std::move(kinds);
  c.budget = budget;
  return c;
}

Transaction victim_tx(TokenAmount min_out = TokenAmount::parse("75.757576"), TokenAmount gas = {}) {
  return Transaction::swap(TxId{1}, kUser, SwapIntent(PoolId{1}, Direction::YforX, 100_tok, min_out), gas, 0);
}

double spot(const Pool& p) { return p.spot_price(); }

}  // namespace

TEST_CASE("scan_opportunities") {
  const std::map<PoolId, Pool> pools{{PoolId{1}, kA}};
  const auto cfg = bot({StrategyKind::Sandwich});
  CHECK(scan_opportunities({}, pools, cfg).empty());

  const std::vector<Transaction> view{victim_tx()};
  const auto ops = scan_opportunities(view, pools, cfg);
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].kind == StrategyKind::Sandwich);
  CHECK(ops[0].victim == TxId{1});
  // Net of the searcher's own gas: 2 legs, front at 1 micro, back at 0.
  const auto o = oracle::sandwich({1000'000'000, 1000'000'000}, ops[0].size.millionths(), 100'000'000);
  CHECK(ops[0].estimated_profit.millionths() == o.profit - 100);
  CHECK(ops[0].estimated_profit.to_double() == doctest::Approx(18.032787).epsilon(1e-5));

  const std::map<PoolId, Pool> two{{PoolId{1}, kA}, {PoolId{2}, kB}};
  const auto arb = scan_opportunities({}, two, bot({StrategyKind::CrossPoolArb}));
  REQUIRE(arb.size() == 1);
  CHECK(arb[0].kind == StrategyKind::CrossPoolArb);
  CHECK(spot(kB) == doctest::Approx(1.5625));
}

TEST_CASE("scan results are sorted by profit") {
  const std::map<PoolId, Pool> pools{{PoolId{1}, kA}, {PoolId{2}, kB}};
  std::vector<Transaction> view;
  for (std::uint64_t i = 1; i <= 5; ++i)
    view.push_back(Transaction::swap(TxId{i}, kUser,
                                     SwapIntent(PoolId{1}, Direction::YforX, TokenAmount::units(10 * i)), {}, 0));
  const auto ops = scan_opportunities(
      view, pools, bot({StrategyKind::Sandwich, StrategyKind::BackRun, StrategyKind::CrossPoolArb}, 50_tok));
  REQUIRE(ops.size() > 2);
  for (std::size_t i = 1; i < ops.size(); ++i) CHECK(ops[i - 1].estimated_profit >= ops[i].estimated_profit);
}

TEST_CASE("craft_frontrun_copy") {
  auto cfg = bot({StrategyKind::FrontRunCopy});
  cfg.gas_bump = 2_tok;
  IdSequence ids(1000);
  const auto v = victim_tx({}, 10_tok);
  const auto copy = craft_frontrun_copy(v, cfg, {ids, 3});
  CHECK(copy.gas_price() == 12_tok);
  CHECK(copy.gas_price() > v.gas_price());
  CHECK(copy.sender() == kBot);
  CHECK(copy.swap_intent()->amount_in == v.swap_intent()->amount_in);
  CHECK(copy.id() == TxId{1000});

  const auto transfer = Transaction::transfer(TxId{2}, kUser, TransferIntent(kBot, Asset::Y, 1_tok), {}, 0);
  CHECK_THROWS_AS(craft_frontrun_copy(transfer, cfg, {ids, 3}), SimError);
  cfg.budget = 10_tok;
  try {
    (void)craft_frontrun_copy(v, cfg, {ids, 3});
    FAIL("expected BudgetExceeded");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("craft_sandwich") {
  IdSequence ids(1000);
  const auto cfg = bot({StrategyKind::Sandwich});

  SUBCASE("canonical victim") {
    const auto plan = craft_sandwich(victim_tx(), kA, cfg, {ids, 0});
    const auto& legs = plan.bundle.txs();
    REQUIRE(legs.size() == 3);
    CHECK(legs[1].id() == TxId{1});
    CHECK(legs[0].swap_intent()->amount_in.millionths() == 99'999'998);
    CHECK(legs[2].swap_intent()->direction == Direction::XforY);
    CHECK(legs[2].swap_intent()->amount_in == plan.expected.front_out);
    const auto o = oracle::sandwich({1000'000'000, 1000'000'000}, 99'999'998, 100'000'000);
    CHECK(plan.expected.profit.millionths() == o.profit);
    CHECK(plan.expected.profit.to_double() == doctest::Approx(18.032787).epsilon(1e-4));
    CHECK(plan.expected.victim_out >= TokenAmount::parse("75.757576"));
  }
  SUBCASE("zero tolerance victim") {
    try {
      (void)craft_sandwich(victim_tx(TokenAmount::parse("90.909090")), kA, cfg, {ids, 0});
      FAIL("expected NoProfitableSize");
    } catch (const SimError& e) {
      CHECK(e.code() == ErrorCode::NoProfitableSize);
    }
  }
  SUBCASE("budget 50 caps the front leg") {
    const auto plan = craft_sandwich(victim_tx(), kA, bot({StrategyKind::Sandwich}, 50_tok), {ids, 0});
    CHECK(plan.bundle.txs()[0].swap_intent()->amount_in == 50_tok);
    const auto o = oracle::sandwich({1000'000'000, 1000'000'000}, 50'000'000, 100'000'000);
    CHECK(plan.expected.profit.millionths() == o.profit);
    CHECK(o.profit > 0);
  }
}

TEST_CASE("property: crafted sandwich profit matches its opportunity estimate") {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 200; ++i) {
    const Pool p(PoolId{1}, TokenAmount::units(500 + gen() % 5000), TokenAmount::units(500 + gen() % 5000));
    const auto in = TokenAmount::units(1 + gen() % 80);
    const auto quoted = quote_swap(p, Direction::YforX, in);
    const auto floor = quoted.fraction(0.9 + 0.09 * static_cast<double>(gen() % 100) / 100.0);
    const auto v = Transaction::swap(TxId{1}, kUser, SwapIntent(PoolId{1}, Direction::YforX, in, floor), {}, 0);
    const auto cfg = bot({StrategyKind::Sandwich}, TokenAmount::units(1 + gen() % 200));
    const auto ops = scan_opportunities(std::vector<Transaction>{v}, {{PoolId{1}, p}}, cfg);
    IdSequence ids(1000);
    if (ops.empty()) {
      CHECK_THROWS_AS(craft_sandwich(v, p, cfg, {ids, 0}), SimError);
      continue;
    }
    const auto plan = craft_sandwich(v, p, cfg, {ids, 0});
    const auto o = oracle::sandwich({p.reserve_y().millionths(), p.reserve_x().millionths()},
                                    plan.bundle.txs()[0].swap_intent()->amount_in.millionths(), in.millionths());
    CHECK(o.victim_out >= floor.millionths());
    const auto gas = static_cast<std::int64_t>(plan.bundle.txs()[0].gas_cost().millionths() +
                                               plan.bundle.txs()[2].gas_cost().millionths());
    CHECK(std::llabs(o.profit - gas - static_cast<std::int64_t>(ops[0].estimated_profit.millionths())) <= 1);
  }
}

TEST_CASE("property: sandwich profit is positive for any front size up to a*") {
  std::mt19937_64 gen(37);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t rx = (500 + gen() % 5000) * 1'000'000, ry = (500 + gen() % 5000) * 1'000'000;
    const std::uint64_t vin = (1 + gen() % 100) * 1'000'000;
    const auto quoted = oracle::swap_out({ry, rx}, vin);
    const std::uint64_t floor = quoted - quoted / 20;
    const Pool p(PoolId{1}, TokenAmount::from_millionths(rx), TokenAmount::from_millionths(ry));
    const auto a = optimal_frontrun_size(
        p, SwapIntent(PoolId{1}, Direction::YforX, TokenAmount::from_millionths(vin), TokenAmount::from_millionths(floor)),
        1'000'000_tok);
    REQUIRE(a.millionths() > 0);
    const std::uint64_t f = 1 + gen() % a.millionths();
    CHECK(oracle::sandwich({ry, rx}, f, vin).profit > 0);
  }
}

TEST_CASE("craft_backrun") {
  IdSequence ids(1000);
  const auto cfg = bot({StrategyKind::BackRun});
  const auto target = victim_tx({}, 5_tok);
  const Pool moved = apply_swap(kA, Direction::YforX, 100_tok).first;
  const Pool reference(PoolId{2}, 1000_tok, 1000_tok);

  const auto trade = craft_backrun(target, kA, reference, cfg, {ids, 0});
  CHECK(trade.trip.profit() > SignedAmount{});
  CHECK(trade.buy.swap_intent()->pool == PoolId{2});
  CHECK(trade.sell.swap_intent()->pool == PoolId{1});
  CHECK(trade.buy.gas_price() == 5_tok - 1_micro);
  // Oracle replay of the two legs.
  const auto x = oracle::swap_out({1000'000'000, 1000'000'000}, trade.trip.y_in.millionths());
  const auto y = oracle::swap_out({moved.reserve_x().millionths(), moved.reserve_y().millionths()}, x);
  CHECK(static_cast<std::int64_t>(y) - static_cast<std::int64_t>(trade.trip.y_in.millionths()) ==
        trade.trip.profit().millionths());

  const auto noop = Transaction::noop(TxId{3}, kUser, {}, 0);
  CHECK_THROWS_AS(craft_backrun(noop, kA, reference, cfg, {ids, 0}), SimError);
  // Reference already sits where the target leaves the pool.
  const Pool twin(PoolId{3}, moved.reserve_x(), moved.reserve_y());
  try {
    (void)craft_backrun(target, kA, twin, cfg, {ids, 0});
    FAIL("expected NoProfit");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::NoProfit);
  }
}

TEST_CASE("cross_pool_arbitrage") {
  IdSequence ids(1000);
  const auto cfg = bot({StrategyKind::CrossPoolArb});
  const auto trade = cross_pool_arbitrage(kA, kB, 1'000'000_tok, cfg, {ids, 0});
  REQUIRE(trade);
  CHECK(trade->trip.profit() > SignedAmount{});
  const Pool a2 = apply_swap(kA, Direction::YforX, trade->trip.y_in).first;
  const Pool b2 = apply_swap(kB, Direction::XforY, trade->trip.x_mid).first;
  CHECK(std::abs(spot(a2) - spot(b2)) / spot(a2) < 0.01);

  // Grid oracle over whole-token sizes never beats it by more than rounding.
  std::int64_t best = 0;
  for (std::uint64_t y = 1; y < 400; ++y) {
    const auto x = oracle::swap_out({1000'000'000, 1000'000'000}, y * 1'000'000);
    best = std::max(best, static_cast<std::int64_t>(oracle::swap_out({800'000'000, 1250'000'000}, x)) -
                              static_cast<std::int64_t>(y * 1'000'000));
  }
  CHECK(trade->trip.profit().millionths() >= best - 2);

  CHECK_FALSE(cross_pool_arbitrage(kA, Pool(PoolId{3}, 1000_tok, 1000_tok), 1'000'000_tok, cfg, {ids, 0}));
  CHECK_FALSE(cross_pool_arbitrage(kA, kB, TokenAmount{}, cfg, {ids, 0}));
}

TEST_CASE("gas auction") {
  auto cfg = bot({StrategyKind::FrontRunCopy});
  cfg.gas_bump = 5_tok;
  CHECK(gas_auction_response(10_tok, 30_tok, cfg) == 15_tok);
  CHECK_FALSE(gas_auction_response(28_tok, 30_tok, cfg));

  SUBCASE("two equal valuations") {
    cfg.max_escalations = 100;
    auto other = cfg;
    other.id = AgentId{21};
    const auto res = run_gas_auction({{&cfg, 30_tok}, {&other, 30_tok}}, 5_tok);

    // Independent replay of the escalation loop.
    std::uint64_t bid = 5, turn = 1, replies[2] = {0, 0};
    while (bid + 5 <= 30) {
      bid += 5;
      ++replies[turn];
      turn ^= 1;
    }
    CHECK(res.winning_bid.millionths() == bid * 1'000'000);
    CHECK(res.responses.at(kBot) == replies[0]);
    CHECK(res.responses.at(AgentId{21}) == replies[1]);
    CHECK(res.responses.at(kBot) <= 6);
    CHECK(res.responses.at(AgentId{21}) <= 6);
    for (std::size_t i = 1; i < res.history.size(); ++i)
      CHECK(res.history[i].bid >= res.history[i - 1].bid + cfg.gas_bump);
  }
  SUBCASE("max_escalations bounds responses") {
    cfg.max_escalations = 1;
    auto other = cfg;
    other.id = AgentId{21};
    const auto res = run_gas_auction({{&cfg, 100_tok}, {&other, 100_tok}}, 5_tok);
    CHECK(res.responses.at(AgentId{21}) <= 1);
    CHECK(res.responses.at(kBot) <= 1);
  }
}
