#include "doctest.h"

#include <random>

#include "../oracle.hpp"
#include "mevsim/model.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

constexpr AgentId kAlice{10};
constexpr AgentId kBot{20};
constexpr AgentId kBuilder{30};
constexpr AgentId kProposer{40};
constexpr PoolId kPool{1};

ChainState genesis() {
  ChainState s;
  s.add_pool(Pool(kPool, 1000_tok, 1000_tok));
  s.credit(kAlice, Asset::Y, 500_tok);
  s.credit(kBot, Asset::Y, 500_tok);
  s.credit(kBuilder, Asset::Y, 100_tok);
  return s;
}

Transaction buy(std::uint64_t id, AgentId who, TokenAmount in, TokenAmount min_out = {}, TokenAmount gas = {}) {
  return Transaction::swap(TxId{id}, who, SwapIntent(kPool, Direction::YforX, in, min_out), gas, 0);
}

Transaction sell(std::uint64_t id, AgentId who, TokenAmount in, TokenAmount gas = {}) {
  return Transaction::swap(TxId{id}, who, SwapIntent(kPool, Direction::XforY, in), gas, 0);
}

}  // namespace

TEST_CASE("execute_transaction: success, revert and drop") {
  const ChainState s0 = genesis();

  SUBCASE("success") {
    auto [s, r] = execute_transaction(s0, buy(1, kAlice, 100_tok));
    CHECK(r.status == TxStatus::Success);
    CHECK(r.amount_out.millionths() == oracle::swap_out({1000'000'000, 1000'000'000}, 100'000'000));
    CHECK(s.balance(kAlice, Asset::X).str() == "90.909090");
    CHECK(s.balance(kAlice, Asset::Y) == 400_tok);
    CHECK(s.is_included(TxId{1}));
  }
  SUBCASE("min_out 95 reverts but charges gas") {
    const auto tx = buy(1, kAlice, 100_tok, 95_tok, 1_tok);
    auto [s, r] = execute_transaction(s0, tx);
    CHECK(r.status == TxStatus::Reverted);
    CHECK(r.amount_out.is_zero());
    CHECK(r.gas_paid == 100_tok);
    CHECK(s.pool(kPool) == s0.pool(kPool));
    CHECK(s.balance(kAlice, Asset::Y) == 400_tok);
    CHECK(s.balance(kCoinbase, Asset::Y) == 100_tok);
  }
  SUBCASE("unfunded sender is dropped with no gas") {
    auto [s, r] = execute_transaction(s0, buy(1, AgentId{99}, 1_tok));
    CHECK(r.status == TxStatus::Dropped);
    CHECK(r.error == ErrorCode::InsufficientBalance);
    CHECK(s == s0);
  }
  SUBCASE("unknown pool is dropped") {
    const auto tx = Transaction::swap(TxId{1}, kAlice, SwapIntent(PoolId{7}, Direction::YforX, 1_tok), {}, 0);
    auto [s, r] = execute_transaction(s0, tx);
    CHECK(r.error == ErrorCode::UnknownPool);
    CHECK(s == s0);
  }
  SUBCASE("zero-size swap cannot be constructed") {
    CHECK_THROWS_AS(SwapIntent(kPool, Direction::YforX, TokenAmount{}), SimError);
  }
  SUBCASE("already included") {
    auto s = execute_transaction(s0, buy(1, kAlice, 1_tok)).first;
    CHECK_THROWS_AS(execute_transaction(s, buy(1, kAlice, 1_tok)), SimError);
  }
}

TEST_CASE("transfers and noops") {
  const ChainState s0 = genesis();
  auto [s, r] = execute_transaction(
      s0, Transaction::transfer(TxId{1}, kAlice, TransferIntent(kBot, Asset::Y, 5_tok), 1_micro, 0));
  CHECK(r.status == TxStatus::Success);
  CHECK(s.balance(kBot, Asset::Y) == 505_tok);
  CHECK(s.balance(kAlice, Asset::Y) == 495_tok - TokenAmount::from_millionths(21));
  auto [s2, r2] = execute_transaction(s, Transaction::noop(TxId{2}, kBot, 1_micro, 0));
  CHECK(r2.gas_paid.millionths() == 10);
}

TEST_CASE("execute_block on the canonical sandwich") {
  const ChainState s0 = genesis();
  Block b(1, kBuilder);
  SUBCASE("empty payload") {
    auto [s, rs] = execute_block(s0, b);
    CHECK(rs.empty());
    CHECK(s.height() == 1);
    CHECK(s.pools() == s0.pools());
    CHECK(s.balances() == s0.balances());
  }
  SUBCASE("sandwich bundle") {
    const auto o = oracle::sandwich({1000'000'000, 1000'000'000}, 100'000'000, 100'000'000);
    b.append(Bundle({buy(1, kBot, 100_tok), buy(2, kAlice, 100_tok),
                     sell(3, kBot, TokenAmount::from_millionths(o.front_out))},
                    kBot));
    auto [s, rs] = execute_block(s0, b);
    REQUIRE(rs.size() == 3);
    for (const auto& r : rs) CHECK(r.status == TxStatus::Success);
    const auto net = SignedAmount::diff(s.balance(kBot, Asset::Y), s0.balance(kBot, Asset::Y));
    CHECK(net.millionths() == o.profit);
    CHECK(net.to_double() == doctest::Approx(18.032787).epsilon(1e-5));
    CHECK(rs[1].amount_out.millionths() == o.victim_out);
  }
  SUBCASE("duplicate id rejects the whole block") {
    b.append(buy(1, kAlice, 1_tok));
    b.append(buy(1, kBot, 1_tok));
    CHECK_THROWS_AS(execute_block(s0, b), SimError);
  }
  SUBCASE("gas limit") {
    Block tight(1, kBuilder, 150);
    tight.append(buy(1, kAlice, 1_tok));
    tight.append(buy(2, kBot, 1_tok));
    try {
      (void)execute_block(s0, tight);
      FAIL("expected GasLimitExceeded");
    } catch (const SimError& e) {
      CHECK(e.code() == ErrorCode::GasLimitExceeded);
    }
  }
  SUBCASE("bid moves from builder to proposer") {
    b.append(buy(1, kAlice, 1_tok, {}, 1_tok));
    b.set_proposer(kProposer);
    b.set_bid(90_tok);
    auto [s, rs] = execute_block(s0, b);
    CHECK(s.balance(kBuilder, Asset::Y) == 110_tok);
    CHECK(s.balance(kProposer, Asset::Y) == 90_tok);
  }
}

TEST_CASE("bundle atomicity") {
  const ChainState s0 = genesis();
  SUBCASE("a revert inside reverts every member") {
    Block b(1, kBuilder);
    b.append(buy(1, kAlice, 50_tok, {}, 1_micro));
    b.append(Bundle({buy(2, kBot, 10_tok, {}, 1_micro), buy(3, kBot, 10_tok, 1000_tok, 1_micro)}, kBot));
    auto [s, rs] = execute_block(s0, b);
    CHECK(rs[0].status == TxStatus::Success);
    CHECK(rs[1].status == TxStatus::Reverted);
    CHECK(rs[2].status == TxStatus::Reverted);
    CHECK(s.balance(kBot, Asset::X).is_zero());
    CHECK(s.balance(kBot, Asset::Y) == 500_tok - TokenAmount::from_millionths(200));
    CHECK(s.is_included(TxId{2}));
  }
  SUBCASE("a drop inside drops every member") {
    Block b(1, kBuilder);
    b.append(Bundle({buy(2, kBot, 10_tok), buy(3, AgentId{99}, 10_tok)}, kBot));
    auto [s, rs] = execute_block(s0, b);
    CHECK(rs[0].status == TxStatus::Dropped);
    CHECK(rs[0].error == ErrorCode::BundleAborted);
    CHECK(rs[1].status == TxStatus::Dropped);
    CHECK_FALSE(s.is_included(TxId{2}));
    CHECK(s.pools() == s0.pools());
  }
  SUBCASE("foreign tx inside a span is rejected") {
    Block b(1, kBuilder);
    b.append(buy(1, kAlice, 1_tok));
    b.reset_payload({buy(1, kAlice, 1_tok), buy(2, kBot, 1_tok)}, {BundleSpan{1, 2}});
    CHECK_THROWS_AS(execute_block(s0, b), SimError);
  }
}

TEST_CASE("property: random blocks conserve supply, keep atomicity and replay purely") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    ChainState s0 = genesis();
    s0.credit(kAlice, Asset::X, 50_tok);
    const auto supply_x = s0.total_supply(Asset::X);
    const auto supply_y = s0.total_supply(Asset::Y);

    Block b(1, kBuilder);
    b.set_proposer(kProposer);
    std::uint64_t id = 1;
    const AgentId senders[] = {kAlice, kBot, AgentId{99}};
    auto random_tx = [&] {
      const AgentId who = senders[gen() % 3];
      const auto amount = TokenAmount::from_millionths(1 + gen() % 80'000'000);
      const auto gas = TokenAmount::from_millionths(gen() % 3'000);
      const auto floor = gen() % 4 == 0 ? TokenAmount::from_millionths(gen() % 100'000'000) : TokenAmount{};
      if (gen() % 2) return buy(id++, who, amount, floor, gas);
      return Transaction::swap(TxId{id++}, who, SwapIntent(kPool, Direction::XforY, amount, floor), gas, 0);
    };
    std::vector<std::pair<std::size_t, std::size_t>> bundles;
    for (int k = 0; k < 6; ++k) {
      if (gen() % 3 == 0) {
        std::vector<Transaction> txs;
        const std::size_t n = 1 + gen() % 3;
        for (std::size_t j = 0; j < n; ++j) txs.push_back(random_tx());
        bundles.emplace_back(b.payload().size(), n);
        b.append(Bundle(std::move(txs), kBot));
      } else {
        b.append(random_tx());
      }
    }
    const auto [s1, rs] = execute_block(s0, b);
    const auto [s2, rs2] = execute_block(s0, b);
    REQUIRE(s1 == s2);
    REQUIRE(rs == rs2);
    CHECK(s1.total_supply(Asset::X) == supply_x);
    CHECK(s1.total_supply(Asset::Y) == supply_y);
    for (auto [first, n] : bundles) {
      for (std::size_t j = 1; j < n; ++j) CHECK(rs[first + j].status == rs[first].status);
    }
    const auto& p0 = s0.pool(kPool);
    const auto& p1 = s1.pool(kPool);
    using u128 = unsigned __int128;
    CHECK(static_cast<u128>(p1.reserve_x().millionths()) * p1.reserve_y().millionths() >=
          static_cast<u128>(p0.reserve_x().millionths()) * p0.reserve_y().millionths());
  }
}

TEST_CASE("penalties and state hash") {
  const ChainState s0 = genesis();
  auto [s, taken] = collect_penalty(s0, kBuilder, AgentId{77}, Asset::Y, 150_tok);
  CHECK(taken == 100_tok);
  CHECK(s.balance(AgentId{77}, Asset::Y) == 100_tok);
  CHECK(state_hash(s) != state_hash(s0));
  CHECK(state_hash(genesis()) == state_hash(s0));
}
