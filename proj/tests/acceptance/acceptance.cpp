// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracle.hpp"
#include "mevsim/amm.hpp"
#include "mevsim/engine.hpp"
#include "mevsim/policy.hpp"
#include "mevsim/scenario.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

const std::filesystem::path kDir = MEVSIM_SCENARIO_DIR;

std::vector<std::string> shipped_names() {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(kDir))
    if (e.path().extension() == ".yaml") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

Scenario shipped(const std::string& name, std::vector<Override> ov = {}) {
  std::ifstream in(kDir / (name + ".yaml"));
  std::ostringstream s;
  s << in.rdbuf();
  return parse_scenario(s.str(), ov, name);
}

std::string log_text(const RunResult& r) {
  std::ostringstream s;
  r.log.write(s);
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Verdict amm_oracle() {
  using u128 = unsigned __int128;
  std::mt19937_64 gen(1);
  std::uint64_t mismatches = 0, drift = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100'000; ++i) {
    const std::uint64_t rx = 1 + gen() % 10'000'000'000'000ull;
    const std::uint64_t ry = 1 + gen() % 10'000'000'000'000ull;
    const auto dir = gen() % 2 ? Direction::XforY : Direction::YforX;
    const Pool p(PoolId{1}, TokenAmount::from_millionths(rx), TokenAmount::from_millionths(ry));
    const std::uint64_t rin = dir == Direction::XforY ? rx : ry;
    const std::uint64_t rout = dir == Direction::XforY ? ry : rx;
    const std::uint64_t dx = 1 + gen() % (2 * rin);

    const auto [after, out] = apply_swap(p, dir, TokenAmount::from_millionths(dx));
    if (out.millionths() != oracle::swap_out({rin, rout}, dx)) ++mismatches;
    if (quote_swap(p, dir, TokenAmount::from_millionths(dx)) != out) ++mismatches;

    // k never shrinks and grows by less than one output millionth's worth.
    const u128 k = static_cast<u128>(rx) * ry;
    const u128 k2 = static_cast<u128>(after.reserve_x().millionths()) * after.reserve_y().millionths();
    const std::uint64_t new_in = after.reserve(input_asset(dir)).millionths();
    if (k2 < k || k2 - k > new_in) ++drift;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && drift == 0 && t < 5.0,
          fmt("1e5 swaps, %llu oracle mismatches, %llu k violations, %.2fs", (unsigned long long)mismatches,
              (unsigned long long)drift, t)};
}

Verdict canonical_sandwich() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_scenario(shipped("canonical_sandwich"));
  const double t = seconds_since(t0);

  const Pool p(PoolId{1}, 1000_tok, 1000_tok);
  const SwapIntent victim(PoolId{1}, Direction::YforX, 100_tok);
  const auto sim = simulate_sandwich(p, victim, 100_tok);
  const TokenAmount quoted = quote_swap(p, Direction::YforX, 100_tok);
  const double slip = realized_slippage(quoted, sim.victim_out);

  const auto o = oracle::sandwich({1000 * oracle::kMicro, 1000 * oracle::kMicro}, 100 * oracle::kMicro,
                                  100 * oracle::kMicro);
  const double profit = r.summary.mafia.to_double();
  const double loss = r.summary.welfare_loss.to_double();
  const bool ok = std::abs(profit - 18.032787) <= 1e-4 && std::abs(loss - 15.151515) <= 1e-4 &&
                  std::abs(slip - 0.166667) <= 1e-4 && r.summary.mafia.millionths() == o.profit &&
                  sim.victim_out.millionths() == o.victim_out &&
                  r.summary.welfare_loss == SignedAmount::diff(quoted, sim.victim_out) && t < 1.0;
  return {ok, fmt("profit %.6f, victim loss %.6f, slippage %.6f, %.3fs", profit, loss, slip, t)};
}

Verdict sandwich_profitability() {
  std::mt19937_64 gen(3);
  int positive = 0, total = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t rx = (500 + gen() % 5000) * 1'000'000, ry = (500 + gen() % 5000) * 1'000'000;
    const std::uint64_t vin = (1 + gen() % 100) * 1'000'000;
    const std::uint64_t quoted = oracle::swap_out({ry, rx}, vin);
    const std::uint64_t floor = quoted - quoted / (5 + gen() % 50);
    const Pool p(PoolId{1}, TokenAmount::from_millionths(rx), TokenAmount::from_millionths(ry));
    const SwapIntent v(PoolId{1}, Direction::YforX, TokenAmount::from_millionths(vin), TokenAmount::from_millionths(floor));
    const TokenAmount a = optimal_frontrun_size(p, v, 1'000'000_tok);
    ++total;
    if (a.is_zero()) continue;
    const std::uint64_t f = 1 + gen() % a.millionths();
    const auto s = simulate_sandwich(p, v, TokenAmount::from_millionths(f));
    if (s.profit > SignedAmount{} && !s.victim_reverted && s.profit.millionths() == oracle::sandwich({ry, rx}, f, vin).profit)
      ++positive;
  }
  return {positive == total, fmt("%d/%d instances profitable", positive, total)};
}

Verdict collusion_threshold() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  int transition = -1;
  std::string line;
  for (int F = 0; F <= 24; F += 2) {
    RegulatoryRegime regime{true, 0.5, TokenAmount::from_millionths(static_cast<std::uint64_t>(F) * 1'000'000)};
    std::uint64_t colluding = 0, rounds = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng = Rng::stream(seed, "collusion-acceptance");
      const auto g = run_collusion_game(4_tok, 10_tok, regime, 2, 200, rng);
      colluding += g.colluding_rounds;
      rounds += g.rounds;
    }
    const double frac = static_cast<double>(colluding) / static_cast<double>(rounds);
    if (F <= 10 && frac < 0.95) ok = false;
    if (F >= 14 && frac > 0.05) ok = false;
    if (transition < 0 && frac < 0.5) transition = F;
    line += fmt(" F%d=%.2f", F, frac);
  }
  const double t = seconds_since(t0);
  ok = ok && std::abs(transition - 12) <= 2 && t < 30.0;
  return {ok, fmt("F*=%d,%s, %.2fs", transition, line.c_str(), t)};
}

Verdict tee_spam() {
  bool ok = true;
  std::string line;
  for (std::uint64_t k : {1u, 3u, 9u}) {
    std::vector<Transaction> payload;
    payload.push_back(Transaction::swap(TxId{1}, AgentId{1}, SwapIntent(PoolId{1}, Direction::YforX, 1_tok), 1_tok, 0));
    for (std::uint64_t c = 0; c < k; ++c)
      payload.push_back(
          Transaction::swap(TxId{100 + c}, AgentId{100}, SwapIntent(PoolId{1}, Direction::YforX, 1_tok), 1_tok, 0));
    Rng rng = Rng::stream(k, "tee-acceptance");
    int ahead = 0;
    for (int i = 0; i < 10'000; ++i) {
      const auto order = tee_shuffle(payload, rng);
      const auto victim = std::find_if(order.begin(), order.end(), [](const Transaction& t) { return t.id() == TxId{1}; });
      ahead += victim != order.begin();
    }
    const double freq = ahead / 10'000.0;
    const double want = static_cast<double>(k) / static_cast<double>(k + 1);
    ok = ok && std::abs(freq - want) <= 0.02;
    line += fmt(" k=%llu %.4f (%.4f)", (unsigned long long)k, freq, want);
  }
  return {ok, "attacker first:" + line};
}

Verdict centralization() {
  const auto t0 = std::chrono::steady_clock::now();
  int dominant = 0, trending = 0;
  double uniform_hhi = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_scenario(shipped("centralization_rate", {{"seed", std::to_string(seed)}}), RunOptions{false});
    const auto& s = r.summary;
    const auto it = s.shares.find(AgentId{202});
    dominant += it != s.shares.end() && it->second >= 0.9;
    trending += s.hhi_trend.tau > 0.0 && s.hhi_trend.p_value < 0.01;

    const auto u =
        run_scenario(shipped("centralization_uniform", {{"seed", std::to_string(seed)}}), RunOptions{false});
    uniform_hhi += u.summary.hhi_mean / 20.0;
  }
  const bool ok = dominant >= 18 && trending >= 18 && std::abs(uniform_hhi - 1.0 / 3.0) <= 0.05;
  return {ok, fmt("share>=0.9 in %d/20 seeds, rising HHI trend in %d/20, uniform mean HHI %.4f, %.1fs", dominant,
                  trending, uniform_hhi, seconds_since(t0))};
}

Verdict censorship() {
  const auto all = run_scenario(shipped("censorship"), RunOptions{false});
  const auto mixed = run_scenario(shipped("censorship_mixed"), RunOptions{false});
  const auto& c = all.summary.censorship;
  const double cf = mixed.summary.censorship.compliant_fraction;
  const bool ok = all.summary.blocks >= 1000 && c.sanctioned_submitted > 0 && c.sanctioned_included == 0 &&
                  cf > 0.0 && cf < 1.0;
  return {ok, fmt("%llu blocks, %llu/%llu sanctioned included, mixed compliant fraction %.3f",
                  (unsigned long long)all.summary.blocks, (unsigned long long)c.sanctioned_included,
                  (unsigned long long)c.sanctioned_submitted, cf)};
}

// Criteria 8 and 9 share the full runs.
struct ShippedRun {
  std::string name;
  bool identical;
  bool replays;
  bool closes;
  std::string closure;
};

std::vector<ShippedRun> run_shipped() {
  std::vector<ShippedRun> out;
  for (const auto& name : shipped_names()) {
    const Scenario sc = shipped(name);
    const RunResult a = run_scenario(sc);
    const RunResult b = run_scenario(sc, RunOptions{false});
    const std::string text = log_text(a);
    std::istringstream in(text);
    const ReplayResult rep = replay_log(EventLog::read(in));
    const auto& s = a.summary;
    out.push_back({name, text == log_text(b), rep.ok() && rep.replayed_hash == s.final_hash,
                   s.accounts_close && s.unclassifiable == 0,
                   fmt("%s x=%s y=%s slack=%s", name.c_str(), s.residual_x.str().c_str(), s.residual_y.str().c_str(),
                       s.closure_slack.str().c_str())});
  }
  return out;
}

Verdict determinism(const std::vector<ShippedRun>& runs) {
  int identical = 0, replays = 0;
  std::string failed;
  for (const auto& r : runs) {
    identical += r.identical;
    replays += r.replays;
    if (!r.identical || !r.replays) failed += " " + r.name;
  }
  const int n = static_cast<int>(runs.size());
  return {identical == n && replays == n,
          fmt("%d/%d identical logs, %d/%d replay to the final hash%s", identical, n, replays, n,
              failed.empty() ? "" : (", failing:" + failed).c_str())};
}

Verdict closure(const std::vector<ShippedRun>& runs) {
  int closes = 0;
  std::string failed;
  for (const auto& r : runs) {
    closes += r.closes;
    if (!r.closes) failed += " [" + r.closure + "]";
  }
  const int n = static_cast<int>(runs.size());
  return {closes == n, fmt("%d/%d scenarios close%s", closes, n, failed.c_str())};
}

Verdict escalator() {
  const auto attacked = run_scenario(shipped("canonical_sandwich"));
  const auto r = run_scenario(shipped("escalator"));
  const double rebate = r.summary.rebates.to_double();
  const SignedAmount net = SignedAmount::of(r.summary.rebates) - r.summary.welfare_loss;
  const SignedAmount baseline = SignedAmount{} - attacked.summary.welfare_loss;
  const bool ok = std::abs(rebate - 18.032787) <= 1e-4 && net > baseline;
  return {ok, fmt("rebate %.6f, user net %s vs attacked %s", rebate, net.str().c_str(), baseline.str().c_str())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* title, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", n, title, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "AMM oracle equivalence", amm_oracle);
  report(2, "canonical sandwich", canonical_sandwich);
  report(3, "sandwich profitability", sandwich_profitability);
  report(4, "collusion threshold", collusion_threshold);
  report(5, "TEE spam", tee_spam);
  report(6, "centralization loop", centralization);
  report(7, "censorship soundness", censorship);
  std::vector<ShippedRun> runs;
  try {
    runs = run_shipped();
  } catch (const std::exception& e) {
    std::printf("shipped runs threw: %s\n", e.what());
  }
  report(8, "determinism and replay", [&] { return runs.empty() ? Verdict{false, "no runs"} : determinism(runs); });
  report(9, "accounting closure", [&] { return runs.empty() ? Verdict{false, "no runs"} : closure(runs); });
  report(10, "escalator welfare", escalator);
  return failures;
}
