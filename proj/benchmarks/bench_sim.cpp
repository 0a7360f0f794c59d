#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "mevsim/amm.hpp"
#include "mevsim/engine.hpp"
#include "mevsim/pbs.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

constexpr PoolId kPool{1};

ChainState head(std::uint32_t users) {
  ChainState s;
  s.add_pool(Pool(kPool, 1'000'000_tok, 1'000'000_tok, 30));
  for (std::uint32_t u = 1; u <= users; ++u) s.credit(AgentId{u}, Asset::Y, 1000_tok);
  return s;
}

std::vector<Transaction> user_swaps(std::uint32_t n) {
  std::vector<Transaction> txs;
  for (std::uint32_t u = 1; u <= n; ++u)
    txs.push_back(Transaction::swap(TxId{u}, AgentId{u}, SwapIntent(kPool, Direction::YforX, TokenAmount::units(1 + u % 50)),
                                    TokenAmount::from_millionths(1 + u % 17), 0));
  return txs;
}

void BM_QuoteSwap(benchmark::State& state) {
  const Pool p(kPool, 1000_tok, 1000_tok, 30);
  std::uint64_t in = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quote_swap(p, Direction::YforX, TokenAmount::from_millionths(in)));
    in = in * 6364136223846793005ull % 1'000'000'000 + 1;
  }
}
BENCHMARK(BM_QuoteSwap);

void BM_ApplySwap(benchmark::State& state) {
  Pool p(kPool, 1000_tok, 1000_tok, 30);
  Direction d = Direction::YforX;
  for (auto _ : state) {
    auto [next, out] = apply_swap(p, d, 1_tok);
    benchmark::DoNotOptimize(out);
    p = next;
    d = reverse(d);
  }
}
BENCHMARK(BM_ApplySwap);

void BM_OptimalFrontrun(benchmark::State& state) {
  const Pool p(kPool, 1000_tok, 1000_tok);
  const SwapIntent victim(kPool, Direction::YforX, 100_tok, 80_tok);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_frontrun_size(p, victim, 1000_tok));
}
BENCHMARK(BM_OptimalFrontrun);

void BM_ExecuteBlock(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const ChainState s = head(n);
  Block b(s.height() + 1, AgentId{500});
  for (const auto& tx : user_swaps(n)) b.append(tx);
  for (auto _ : state) benchmark::DoNotOptimize(execute_block(s, b));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ExecuteBlock)->Arg(10)->Arg(50)->Arg(100);

void BM_BuildBlock(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const ChainState s = head(n);
  const std::vector<Transaction> view = user_swaps(n);
  Mempool m(NetworkTopology::uniform(1, 0));
  const SanctionsList none;
  BuilderProfile p;
  p.id = AgentId{500};
  p.budget = 1000_tok;
  for (auto _ : state) benchmark::DoNotOptimize(builder_build_block(p, BuildRequest{s, view, m, none}));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BuildBlock)->Arg(10)->Arg(50)->Arg(100);

Scenario shipped(const char* name, std::uint64_t rounds) {
  std::ifstream in(std::string(MEVSIM_SCENARIO_DIR) + "/" + name + ".yaml");
  std::ostringstream s;
  s << in.rdbuf();
  const std::vector<Override> ov{{"rounds", std::to_string(rounds)}};
  return parse_scenario(s.str(), ov, name);
}

void BM_RunScenario(benchmark::State& state, const char* name) {
  const Scenario sc = shipped(name, static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(sc, RunOptions{false}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_RunScenario, pbs_market, "pbs_market")->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunScenario, legacy_pga, "legacy_pga")->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunScenario, centralization_rate, "centralization_rate")->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
