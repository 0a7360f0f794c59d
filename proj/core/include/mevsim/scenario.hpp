#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mevsim/pbs.hpp"
#include "mevsim/policy.hpp"
#include "mevsim/strategies.hpp"

namespace mevsim {

enum class MarketMode : std::uint8_t { Legacy, Pbs };

struct PoolSpec {
  PoolId id;
  TokenAmount x;
  TokenAmount y;
  std::uint32_t fee_bps = 0;
  bool operator==(const PoolSpec&) const = default;
};

enum class Route : std::uint8_t { Auto, Public, Private };

/// One hand-placed user order.
struct ScriptedOrder {
  std::uint64_t round = 1;
  std::uint64_t tick = 0;  // offset inside the round
  AgentId user;
  PoolId pool;
  Direction direction = Direction::YforX;
  TokenAmount amount_in;
  /// Absent: quote on the user's view minus the configured slippage.
  std::optional<TokenAmount> min_out;
  TokenAmount gas_price;
  Route route = Route::Auto;
  bool operator==(const ScriptedOrder&) const = default;
};

struct UserSpec {
  std::uint32_t count = 0;
  std::uint32_t first_id = 1;
  TokenAmount balance_x;
  TokenAmount balance_y;
  std::uint32_t swaps_per_round = 0;
  TokenAmount amount_min = TokenAmount::units(1);
  TokenAmount amount_max = TokenAmount::units(10);
  double slippage = 0.01;
  TokenAmount gas_price_min;
  TokenAmount gas_price_max;
  /// Chance a random order goes to a builder's private channel (PBS only).
  double private_fraction = 0.0;
  double yforx_fraction = 0.5;
  std::vector<PoolId> pools;  // empty: every pool
  std::vector<ScriptedOrder> scripted;
  /// Users report the including builder when realized slippage exceeds this.
  double report_threshold = 0.05;
  double false_report_rate = 0.0;
  bool operator==(const UserSpec&) const = default;

  AgentId id_at(std::uint32_t i) const noexcept { return AgentId{first_id + i}; }
  bool contains(AgentId a) const noexcept { return a.value >= first_id && a.value < first_id + count; }
};

struct SearcherSpec {
  SearcherConfig config;
  NodeId node{0};
  TokenAmount balance_x;
  TokenAmount balance_y;
  /// Tick inside the round at which the searcher snapshots its node.
  std::uint64_t snapshot_tick = 0;
  bool operator==(const SearcherSpec& o) const {
    return config.id == o.config.id && config.watched_pools == o.config.watched_pools &&
           config.strategies == o.config.strategies && config.gas_bump == o.config.gas_bump &&
           config.max_escalations == o.config.max_escalations && config.budget == o.config.budget &&
           config.spam_copies == o.config.spam_copies && node == o.node && balance_x == o.balance_x &&
           balance_y == o.balance_y && snapshot_tick == o.snapshot_tick;
  }
};

struct BuilderSpec {
  BuilderProfile profile;
  TokenAmount balance_x;
  TokenAmount balance_y;
  /// Market history before round 1: blocks won and order-flow counters.
  std::uint64_t prior_blocks = 0;
  std::uint64_t prior_received = 0;
  std::uint64_t prior_included = 0;
  bool operator==(const BuilderSpec& o) const {
    const auto& a = profile;
    const auto& b = o.profile;
    return a.id == b.id && a.node == b.node && a.honest == b.honest && a.self_dealing == b.self_dealing &&
           a.censoring == b.censoring && a.colluding == b.colluding && a.coalition == b.coalition &&
           a.latency_advantage == b.latency_advantage && a.payment_fraction == b.payment_fraction &&
           a.tee_bound == b.tee_bound && a.accepts_private_flow == b.accepts_private_flow && a.budget == b.budget &&
           balance_x == o.balance_x && balance_y == o.balance_y && prior_blocks == o.prior_blocks &&
           prior_received == o.prior_received && prior_included == o.prior_included;
  }
};

struct ProposerSpec {
  AgentId id;
  NodeId node{0};
  /// Build a greedy local block and take it when it beats every relay offer.
  bool local_building = false;
  bool operator==(const ProposerSpec&) const = default;
};

struct PolicySpec {
  RegulatoryRegime regime;
  AgentId regulator{9000};
  std::uint64_t tee_overhead_gas = kDefaultTeeOverheadGas;
  bool reputation = false;
  double reputation_gamma = 2.0;
  bool escalator = false;
  std::vector<AgentId> extractors;
  /// Share of its extractable value each extractor bids as a rebate.
  double escalator_bid_fraction = 1.0;
  std::vector<AgentId> sanctions;
  bool operator==(const PolicySpec& o) const {
    return regime.active == o.regime.active && regime.p_detect == o.regime.p_detect &&
           regime.penalty == o.regime.penalty && regulator == o.regulator && tee_overhead_gas == o.tee_overhead_gas &&
           reputation == o.reputation && reputation_gamma == o.reputation_gamma && escalator == o.escalator &&
           extractors == o.extractors && escalator_bid_fraction == o.escalator_bid_fraction &&
           sanctions == o.sanctions;
  }
};

struct Scenario {
  std::string name = "scenario";
  MarketMode mode = MarketMode::Pbs;
  LegacyMode legacy_ordering = LegacyMode::Greedy;
  std::uint64_t rounds = 1;
  std::uint64_t ticks_per_round = 4;
  std::uint64_t seed = 1;
  std::uint64_t gas_limit = kDefaultGasLimit;
  std::uint32_t nodes = 1;
  std::uint64_t default_latency = 0;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> latency_overrides;
  std::vector<PoolSpec> pools;
  UserSpec users;
  std::vector<SearcherSpec> searchers;
  std::vector<BuilderSpec> builders;
  std::vector<RelayProfile> relays;
  std::vector<ProposerSpec> proposers;
  RoutingMode routing = RoutingMode::Rate;
  PolicySpec policy;

  bool operator==(const Scenario& o) const;
};

/// Parses YAML or JSON text (JSON is read through the same YAML front end).
/// Throws ConfigError naming the offending field.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Sorted-key JSON that parses back to an equal Scenario.
std::string to_canonical_json(const Scenario& s);

/// Key=value override on the raw document, e.g. "policy.regulator.penalty=13"
/// or "builders.0.payment_fraction=0.5", applied before validation.
struct Override {
  std::string path;
  std::string value;
};
Override parse_override(std::string_view text);
Scenario parse_scenario(std::string_view text, std::span<const Override> overrides, std::string_view origin);

/// Cross-reference checks on an assembled Scenario. Throws ConfigError.
void validate(const Scenario& s);

}  // namespace mevsim
