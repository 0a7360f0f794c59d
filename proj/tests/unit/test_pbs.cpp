#include "doctest.h"

#include "../oracle.hpp"
#include "mevsim/pbs.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

constexpr AgentId kBuilder{100};
constexpr AgentId kUser{10};
constexpr PoolId kPool{1};

ChainState head() {
  ChainState s;
  s.add_pool(Pool(kPool, 1000_tok, 1000_tok));
  for (std::uint32_t u = 1; u <= 20; ++u) s.credit(AgentId{u}, Asset::Y, 1000_tok);
  s.credit(kBuilder, Asset::Y, 1000_tok);
  return s;
}

Transaction swap(std::uint64_t id, AgentId who, TokenAmount in, TokenAmount gas, TokenAmount min_out = {}) {
  return Transaction::swap(TxId{id}, who, SwapIntent(kPool, Direction::YforX, in, min_out), gas, 0);
}

std::vector<std::uint64_t> ids(const Block& b) {
  std::vector<std::uint64_t> out;
  for (const auto& t : b.payload()) out.push_back(t.id().value);
  return out;
}

BuilderProfile honest() {
  BuilderProfile p;
  p.id = kBuilder;
  p.budget = 1000_tok;
  return p;
}

}  // namespace

TEST_CASE("builder profile validation") {
  auto p = honest();
  CHECK_NOTHROW(p.validate());
  p.self_dealing = true;
  CHECK_THROWS_AS(p.validate(), SimError);
  p.honest = false;
  CHECK_NOTHROW(p.validate());
  p.colluding = true;
  CHECK_THROWS_AS(p.validate(), SimError);
  p.coalition = 1;
  p.payment_fraction = 1.5;
  CHECK_THROWS_AS(p.validate(), SimError);
}

TEST_CASE("honest builder orders by gas price") {
  const ChainState s = head();
  Mempool m(NetworkTopology::uniform(1, 0));
  const std::vector<Transaction> view{swap(5, AgentId{1}, 1_tok, 5_micro), swap(9, AgentId{2}, 1_tok, 9_micro),
                                      swap(7, AgentId{3}, 1_tok, 7_micro)};
  const SanctionsList none;
  const auto r = builder_build_block(honest(), BuildRequest{s, view, m, none});
  CHECK(ids(r.block) == std::vector<std::uint64_t>{9, 7, 5});
  CHECK(r.fees == TokenAmount::from_millionths((5 + 9 + 7) * 100));
  CHECK(r.profit == r.fees);
  CHECK(r.block.bid() == r.profit.fraction(0.9));

  SUBCASE("gas limit packs greedily") {
    const auto tight = builder_build_block(honest(), BuildRequest{s, view, m, none, 200});
    CHECK(ids(tight.block) == std::vector<std::uint64_t>{9, 7});
  }
  SUBCASE("private bundles stay contiguous at their effective price") {
    m.register_builder(kBuilder, true);
    m.submit_private_bundle(Bundle({swap(20, AgentId{4}, 1_tok, 8_micro), swap(21, AgentId{4}, 1_tok, 6_micro)},
                                   AgentId{4}),
                            kBuilder, 0);
    const auto r2 = builder_build_block(honest(), BuildRequest{s, view, m, none});
    // Bundle price (8+6)/2 = 7 ties with tx 7, which has the lower id.
    CHECK(ids(r2.block) == std::vector<std::uint64_t>{9, 7, 20, 21, 5});
    REQUIRE(r2.block.spans().size() == 1);
    CHECK(r2.block.spans()[0] == BundleSpan{2, 2});
    CHECK_NOTHROW(execute_block(s, r2.block));
  }
  SUBCASE("empty view gives an empty block") {
    const auto e = builder_build_block(honest(), BuildRequest{s, {}, m, none});
    CHECK(e.block.payload().empty());
    CHECK(e.profit.is_zero());
  }
}

TEST_CASE("self-dealing builder sandwiches the best private victim") {
  const ChainState s = head();
  Mempool m(NetworkTopology::uniform(1, 0));
  m.register_builder(kBuilder, true);
  const auto victim = swap(1, kUser, 100_tok, {}, TokenAmount::parse("75.757576"));
  ChainState funded = s;
  funded.credit(kUser, Asset::Y, 100_tok);
  m.submit_private_bundle(Bundle({victim}, kUser), kBuilder, 0);

  auto p = honest();
  p.honest = false;
  p.self_dealing = true;
  IdSequence seq(1'000'000);
  const SanctionsList none;
  BuildRequest req{funded, {}, m, none};
  req.ids = &seq;
  const auto r = builder_build_block(p, req);

  REQUIRE(r.block.payload().size() == 3);
  CHECK(r.block.payload()[0].sender() == kBuilder);
  CHECK(r.block.payload()[1].id() == TxId{1});
  CHECK(r.block.payload()[2].sender() == kBuilder);
  REQUIRE(r.extractions.size() == 1);
  const auto o = oracle::sandwich({1000'000'000, 1000'000'000},
                                  r.block.payload()[0].swap_intent()->amount_in.millionths(), 100'000'000);
  CHECK(r.profit.millionths() == o.profit);
  CHECK(r.profit.to_double() == doctest::Approx(18.032787).epsilon(1e-4));

  auto [after, receipts] = execute_block(funded, r.block);
  for (const auto& rc : receipts) CHECK(rc.status == TxStatus::Success);
  CHECK(receipts[1].amount_out >= TokenAmount::parse("75.757576"));
}

TEST_CASE("censoring builder drops sanctioned senders") {
  const ChainState s = head();
  Mempool m(NetworkTopology::uniform(1, 0));
  const std::vector<Transaction> view{swap(1, AgentId{1}, 1_tok, 1_micro), swap(2, AgentId{13}, 1_tok, 9_micro)};
  const SanctionsList sanctions({AgentId{13}});
  auto p = honest();
  p.honest = false;
  p.censoring = true;
  const auto r = builder_build_block(p, BuildRequest{s, view, m, sanctions});
  CHECK(ids(r.block) == std::vector<std::uint64_t>{1});
  CHECK_FALSE(sanctions.touches(r.block));
  // An honest builder keeps it.
  CHECK(sanctions.touches(builder_build_block(honest(), BuildRequest{s, view, m, sanctions}).block));
  // Transfers to a sanctioned recipient count too.
  CHECK(sanctions.touches(Transaction::transfer(TxId{3}, AgentId{1}, TransferIntent(AgentId{13}, Asset::Y, 1_tok),
                                                {}, 0)));
}

TEST_CASE("TEE-bound builder adds overhead and dissolves bundles") {
  const ChainState s = head();
  Mempool m(NetworkTopology::uniform(1, 0));
  m.register_builder(kBuilder, true);
  m.submit_private_bundle(Bundle({swap(1, AgentId{1}, 1_tok, 1_micro), swap(2, AgentId{1}, 1_tok, 1_micro)},
                                 AgentId{1}),
                          kBuilder, 0);
  auto p = honest();
  p.tee_bound = true;
  Rng rng(3);
  const SanctionsList none;
  BuildRequest req{s, {}, m, none};
  req.tee_rng = &rng;
  const auto r = builder_build_block(p, req);
  CHECK(r.block.spans().empty());
  CHECK(r.block.gas_used() == 2 * (100 + kDefaultTeeOverheadGas));
}

TEST_CASE("relay_select") {
  const SanctionsList sanctions({AgentId{13}});
  Block clean(1, AgentId{1});
  Block dirty(1, AgentId{2});
  dirty.append(swap(1, AgentId{13}, 1_tok, {}));
  RelayProfile relay{AgentId{500}, false, {AgentId{1}, AgentId{2}}, std::nullopt};

  std::vector<Bid> bids{{AgentId{1}, clean, 5_tok}, {AgentId{2}, dirty, 7_tok}};
  CHECK(relay_select(bids, relay, sanctions)->builder == AgentId{2});
  relay.regulated = true;
  CHECK(relay_select(bids, relay, sanctions)->builder == AgentId{1});

  std::vector<Bid> tied{{AgentId{2}, clean, 5_tok}, {AgentId{1}, clean, 5_tok}};
  CHECK(relay_select(tied, relay, sanctions)->builder == AgentId{1});

  std::vector<Bid> only_dirty{{AgentId{2}, dirty, 7_tok}};
  CHECK_FALSE(relay_select(only_dirty, relay, sanctions));

  RelayProfile narrow{AgentId{501}, false, {AgentId{1}}, std::nullopt};
  CHECK(relay_select(bids, narrow, sanctions)->builder == AgentId{1});

  RelayProfile crooked{AgentId{502}, false, {AgentId{1}, AgentId{2}}, AgentId{1}};
  CHECK(relay_select(bids, crooked, sanctions)->builder == AgentId{1});
}

TEST_CASE("proposer_select") {
  Block b7(1, AgentId{1});
  Block b9(1, AgentId{2});
  Block local(1, AgentId{900});
  const std::vector<Bid> offers{{AgentId{1}, b7, 7_tok}, {AgentId{2}, b9, 9_tok}};
  CHECK(proposer_select(offers, std::nullopt).builder() == AgentId{2});
  CHECK(proposer_select({}, LocalBlock{local, 1_tok}).builder() == AgentId{900});
  const std::vector<Bid> seven{{AgentId{1}, b7, 7_tok}};
  CHECK(proposer_select(seven, LocalBlock{local, 8_tok}).builder() == AgentId{900});
  CHECK(proposer_select(seven, LocalBlock{local, 7_tok}).builder() == AgentId{1});
  try {
    (void)proposer_select({}, std::nullopt);
    FAIL("expected NothingToPropose");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::NothingToPropose);
  }
}

TEST_CASE("route_order_flow") {
  const std::vector<AgentId> builders{AgentId{2}, AgentId{1}};
  InclusionStats stats;
  Rng rng(1);
  CHECK(stats.inclusion_rate(AgentId{1}) == 0.5);
  CHECK(route_order_flow(builders, stats, RoutingMode::Rate, rng) == AgentId{1});

  stats.seed(AgentId{1}, 8, 6);  // 0.7
  stats.seed(AgentId{2}, 8, 7);  // 0.8
  CHECK(route_order_flow(builders, stats, RoutingMode::Rate, rng) == AgentId{2});
  CHECK_THROWS_AS(stats.seed(AgentId{3}, 1, 2), SimError);
  stats.record_included(AgentId{3}, 5);
  CHECK(stats.included(AgentId{3}) == 0);

  std::vector<AgentId> a, b;
  Rng r1(42), r2(42);
  for (int i = 0; i < 50; ++i) {
    a.push_back(route_order_flow(builders, stats, RoutingMode::Uniform, r1));
    b.push_back(route_order_flow(builders, stats, RoutingMode::Uniform, r2));
  }
  CHECK(a == b);
  CHECK(std::count(a.begin(), a.end(), AgentId{1}) > 0);
  CHECK(std::count(a.begin(), a.end(), AgentId{2}) > 0);

  ReputationLedger rep;
  for (std::uint64_t t = 1; t <= 10; ++t) {
    rep.apply(AgentId{1}, ReputationEvent::included(TxId{t}, kUser));
    rep.apply(AgentId{2}, ReputationEvent::included(TxId{100 + t}, kUser));
  }
  for (std::uint64_t t = 1; t <= 8; ++t) rep.apply(AgentId{2}, ReputationEvent::report(TxId{100 + t}, kUser));
  int picked_clean = 0;
  for (int i = 0; i < 2000; ++i)
    picked_clean += route_order_flow(builders, stats, RoutingMode::Reputation, rng, &rep) == AgentId{1};
  // Weights (11/12)^2 vs (3/12)^2.
  const double expect = std::pow(11.0 / 12, 2) / (std::pow(11.0 / 12, 2) + std::pow(3.0 / 12, 2));
  CHECK(picked_clean / 2000.0 == doctest::Approx(expect).epsilon(0.03));
}

TEST_CASE("legacy miner") {
  const ChainState s = head();
  Mempool m(NetworkTopology::uniform(1, 0));
  m.broadcast_tx(swap(3, AgentId{3}, 1_tok, 5_micro), NodeId{0}, 3);  // C
  m.broadcast_tx(swap(1, AgentId{1}, 1_tok, 1_micro), NodeId{0}, 1);  // A
  m.broadcast_tx(swap(2, AgentId{2}, 1_tok, 9_micro), NodeId{0}, 2);  // B
  const auto view = m.node_view(NodeId{0}, 10);
  CHECK(ids(miner_build_legacy(view, LegacyMode::Naive, AgentId{900}, s)) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(ids(miner_build_legacy(view, LegacyMode::Greedy, AgentId{900}, s)) == std::vector<std::uint64_t>{2, 3, 1});
  CHECK(miner_build_legacy({}, LegacyMode::Greedy, AgentId{900}, s).payload().empty());
  CHECK(miner_build_legacy(view, LegacyMode::Greedy, AgentId{900}, s).bid().is_zero());
}
