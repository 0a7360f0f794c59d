#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mevsim/scenario.hpp"

using namespace mevsim;
using namespace mevsim::literals;

namespace {

const std::filesystem::path kDir = MEVSIM_SCENARIO_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kMinimal = R"(
name: tiny
mode: pbs
rounds: 3
pools:
  - {id: 1, x: 100, y: 100}
users:
  count: 2
  balance_y: 10
builders:
  - {id: 50}
relays:
  - {id: 60}
proposers:
  - {id: 70}
)";

std::string error_path(const std::string& text, std::vector<Override> ov = {}) {
  try {
    parse_scenario(text, ov, "test");
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

}  // namespace

TEST_CASE("minimal scenario fills defaults") {
  const Scenario s = parse_scenario(kMinimal, "test");
  CHECK(s.name == "tiny");
  CHECK(s.mode == MarketMode::Pbs);
  CHECK(s.rounds == 3);
  CHECK(s.gas_limit == kDefaultGasLimit);
  CHECK(s.nodes == 1);
  REQUIRE(s.pools.size() == 1);
  CHECK(s.pools[0].x == 100_tok);
  CHECK(s.users.id_at(1) == AgentId{2});
  REQUIRE(s.relays.size() == 1);
  CHECK(s.relays[0].builders == std::vector{AgentId{50}});
  CHECK(s.policy.regulator == AgentId{9000});
}

TEST_CASE("human and canonical forms parse to the same scenario") {
  const Scenario yaml = load_scenario((kDir / "canonical_sandwich.yaml").string());
  const Scenario json = load_scenario((kDir / "canonical_sandwich.json").string());
  CHECK(yaml == json);
  CHECK(to_canonical_json(yaml) == slurp(kDir / "canonical_sandwich.json"));
}

TEST_CASE("canonical form is a fixed point for every shipped scenario") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".yaml") continue;
    ++seen;
    CAPTURE(entry.path().filename().string());
    const Scenario s = load_scenario(entry.path().string());
    const std::string canon = to_canonical_json(s);
    const Scenario back = parse_scenario(canon, "canonical");
    CHECK(back == s);
    CHECK(to_canonical_json(back) == canon);
  }
  CHECK(seen >= 10);
}

TEST_CASE("errors carry the field path") {
  CHECK(error_path(with("bogus: 1\n")) == "bogus");
  CHECK(error_path(with("network: {nodes: 2, speed: 3}\n")) == "network.speed");
  CHECK(error_path(std::string(kMinimal) + "searchers:\n  - {id: 80, strategies: [Teleport]}\n") == "searchers.0.strategies.0");
  CHECK(error_path(with("seed: minus-one\n")) == "seed");
  CHECK(error_path(with("ticks_per_round: 0\n")) == "ticks_per_round");
  CHECK(error_path(kMinimal, {{"rounds", "0"}}) == "rounds");
  CHECK(error_path(kMinimal, {{"pools.0.x", "0"}}) == "pools.0");
  CHECK(error_path(kMinimal, {{"relays.0.id", "50"}}) == "relays.0.id");
  CHECK(error_path(kMinimal, {{"users.scripted", "[{user: 9, pool: 1, amount_in: 1}]"}}) == "users.scripted.0.user");
  CHECK(error_path(kMinimal, {{"mode", "legacy"}}) == "mode");
  CHECK(error_path(kMinimal, {{"market.routing", "reputation"}}) == "market.routing");
  CHECK(error_path(kMinimal, {{"policy.sanctions", "[999]"}}) == "policy.sanctions.0");
  CHECK(error_path(kMinimal, {{"policy.escalator.enabled", "true"}}) == "policy.escalator.extractors");
  CHECK(error_path("pools: [", {}) == "test");
}

TEST_CASE("colluding builders need a partner") {
  const std::string one = with("");
  CHECK(error_path(one, {{"builders.0.flags", "[colluding]"}, {"builders.0.coalition", "1"}}) == "builders");
}

TEST_CASE("overrides") {
  const Override o = parse_override("policy.regulator.penalty=12.5");
  CHECK(o.path == "policy.regulator.penalty");
  CHECK(o.value == "12.5");
  CHECK_THROWS_AS(parse_override("no-equals"), ConfigError);

  const std::vector<Override> ov{{"seed", "99"}, {"policy.regulator.penalty", "12.5"}, {"pools.0.fee_bps", "30"},
                                 {"builders.0.flags", "[self_dealing]"}};
  const Scenario s = parse_scenario(kMinimal, ov, "test");
  CHECK(s.seed == 99);
  CHECK(s.policy.regime.penalty == TokenAmount::parse("12.5"));
  CHECK(s.pools[0].fee_bps == 30);
  CHECK(s.builders[0].profile.self_dealing);
  CHECK_FALSE(s.builders[0].profile.honest);

  CHECK(error_path(kMinimal, {{"pools.5.x", "1"}}) == "pools.5");
}
