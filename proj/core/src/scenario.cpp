#include "mevsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mevsim {

using nlohmann::json;

namespace {

// --- YAML front end -----------------------------------------------------------
// Every scalar becomes a JSON string holding its source text, so YAML and JSON
// inputs reach the typed reader in the same shape.

json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return n.Scalar();
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = to_json(kv.second);
      return o;
    }
  }
  return nullptr;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void apply_override(json& doc, const Override& ov) {
  json* cur = &doc;
  std::string where;
  const auto parts = split(ov.path, '.');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    where += (where.empty() ? "" : ".") + key;
    if (cur->is_array()) {
      if (!all_digits(key)) throw ConfigError(where, "expected an array index");
      const std::size_t idx = std::stoul(key);
      if (idx >= cur->size()) throw ConfigError(where, "index out of range");
      cur = &(*cur)[idx];
    } else {
      if (cur->is_null()) *cur = json::object();
      if (!cur->is_object()) throw ConfigError(where, "cannot descend into a scalar");
      cur = &(*cur)[key];
    }
  }
  // Lists are written as a,b,c in overrides; the value is parsed as YAML so
  // "[1, 2]" works too.
  *cur = to_json(YAML::Load(ov.value));
}

// --- Typed reader ----------------------------------------------------------------

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string scalar(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number() || j.is_boolean()) return j.dump();
  throw ConfigError(path, "expected a scalar");
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  const std::string s = scalar(j, path);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw ConfigError(path, "expected a non-negative integer, got '" + s + "'");
  return v;
}

std::uint32_t as_u32(const json& j, const std::string& path) {
  const std::uint64_t v = as_u64(j, path);
  if (v > UINT32_MAX) throw ConfigError(path, "value too large");
  return static_cast<std::uint32_t>(v);
}

double as_double(const json& j, const std::string& path) {
  const std::string s = scalar(j, path);
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError(path, "expected a number, got '" + s + "'");
  return v;
}

bool as_bool(const json& j, const std::string& path) {
  const std::string s = scalar(j, path);
  if (s == "true" || s == "yes") return true;
  if (s == "false" || s == "no") return false;
  throw ConfigError(path, "expected true or false, got '" + s + "'");
}

TokenAmount as_amount(const json& j, const std::string& path) {
  const std::string s = scalar(j, path);
  try {
    return TokenAmount::parse(s);
  } catch (const SimError& e) {
    throw ConfigError(path, "bad token amount '" + s + "'");
  }
}

template <class F>
auto as_enum(const json& j, const std::string& path, F parse) {
  const std::string s = scalar(j, path);
  try {
    return parse(s);
  } catch (const SimError& e) {
    throw ConfigError(path, e.what());
  }
}

/// Object view that rejects fields nobody asked for.
class Obj {
public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object() && !j_.is_null()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }
  Obj(const Obj&) = delete;
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !j_.is_object()) return;
    for (const auto& [k, v] : j_.items())
      if (!used_.contains(k)) throw ConfigError(child(path_, k), "unknown field");
  }

  const json* get(std::string_view key) {
    used_.insert(std::string(key));
    if (!j_.is_object()) return nullptr;
    auto it = j_.find(std::string(key));
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }
  std::string at(std::string_view key) const { return child(path_, key); }

  const json& need(std::string_view key) {
    if (const json* v = get(key)) return *v;
    throw ConfigError(at(key), "required field missing");
  }

  template <class T, class F>
  void opt(std::string_view key, T& out, F conv) {
    if (const json* v = get(key)) out = conv(*v, at(key));
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto as_list(const json& j, const std::string& path, F item) {
  using T = decltype(item(j, path));
  std::vector<T> out;
  if (j.is_null()) return out;
  if (!j.is_array()) {
    // A bare scalar or "a,b" reads as a list, which keeps overrides short.
    if (j.is_string()) {
      for (const auto& part : split(j.get<std::string>(), ','))
        if (!part.empty()) out.push_back(item(json(part), path));
      return out;
    }
    throw ConfigError(path, "expected a list");
  }
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], path + "." + std::to_string(i)));
  return out;
}

AgentId as_agent(const json& j, const std::string& path) { return AgentId{as_u32(j, path)}; }
PoolId as_pool(const json& j, const std::string& path) { return PoolId{as_u32(j, path)}; }
NodeId as_node(const json& j, const std::string& path) { return NodeId{as_u32(j, path)}; }

MarketMode parse_mode(std::string_view s) {
  if (s == "legacy") return MarketMode::Legacy;
  if (s == "pbs") return MarketMode::Pbs;
  throw SimError(ErrorCode::InvalidArgument, "unknown mode '" + std::string(s) + "' (legacy or pbs)");
}
std::string_view mode_name(MarketMode m) { return m == MarketMode::Legacy ? "legacy" : "pbs"; }

Route parse_route(std::string_view s) {
  if (s == "auto") return Route::Auto;
  if (s == "public") return Route::Public;
  if (s == "private") return Route::Private;
  throw SimError(ErrorCode::InvalidArgument, "unknown route '" + std::string(s) + "'");
}
std::string_view route_name(Route r) {
  switch (r) {
    case Route::Auto: return "auto";
    case Route::Public: return "public";
    case Route::Private: return "private";
  }
  return "?";
}

ScriptedOrder read_order(const json& j, const std::string& path) {
  Obj o(j, path);
  ScriptedOrder s;
  o.opt("round", s.round, as_u64);
  o.opt("tick", s.tick, as_u64);
  s.user = as_agent(o.need("user"), o.at("user"));
  s.pool = as_pool(o.need("pool"), o.at("pool"));
  if (const json* v = o.get("direction")) s.direction = as_enum(*v, o.at("direction"), parse_direction);
  s.amount_in = as_amount(o.need("amount_in"), o.at("amount_in"));
  if (const json* v = o.get("min_out")) s.min_out = as_amount(*v, o.at("min_out"));
  o.opt("gas_price", s.gas_price, as_amount);
  if (const json* v = o.get("route")) s.route = as_enum(*v, o.at("route"), parse_route);
  return s;
}

UserSpec read_users(const json& j, const std::string& path) {
  Obj o(j, path);
  UserSpec u;
  o.opt("count", u.count, as_u32);
  o.opt("first_id", u.first_id, as_u32);
  o.opt("balance_x", u.balance_x, as_amount);
  o.opt("balance_y", u.balance_y, as_amount);
  o.opt("swaps_per_round", u.swaps_per_round, as_u32);
  o.opt("amount_min", u.amount_min, as_amount);
  o.opt("amount_max", u.amount_max, as_amount);
  o.opt("slippage", u.slippage, as_double);
  o.opt("gas_price_min", u.gas_price_min, as_amount);
  o.opt("gas_price_max", u.gas_price_max, as_amount);
  o.opt("private_fraction", u.private_fraction, as_double);
  o.opt("yforx_fraction", u.yforx_fraction, as_double);
  if (const json* v = o.get("pools")) u.pools = as_list(*v, o.at("pools"), as_pool);
  if (const json* v = o.get("scripted")) u.scripted = as_list(*v, o.at("scripted"), read_order);
  o.opt("report_threshold", u.report_threshold, as_double);
  o.opt("false_report_rate", u.false_report_rate, as_double);
  return u;
}

SearcherSpec read_searcher(const json& j, const std::string& path) {
  Obj o(j, path);
  SearcherSpec s;
  s.config.id = as_agent(o.need("id"), o.at("id"));
  o.opt("node", s.node, as_node);
  if (const json* v = o.get("strategies")) {
    for (auto k : as_list(*v, o.at("strategies"), [](const json& e, const std::string& p) {
           return as_enum(e, p, parse_strategy);
         }))
      s.config.strategies.insert(k);
  }
  if (const json* v = o.get("pools")) s.config.watched_pools = as_list(*v, o.at("pools"), as_pool);
  o.opt("gas_bump", s.config.gas_bump, as_amount);
  o.opt("max_escalations", s.config.max_escalations, as_u32);
  o.opt("budget", s.config.budget, as_amount);
  o.opt("spam_copies", s.config.spam_copies, as_u32);
  o.opt("balance_x", s.balance_x, as_amount);
  o.opt("balance_y", s.balance_y, as_amount);
  o.opt("snapshot_tick", s.snapshot_tick, as_u64);
  return s;
}

BuilderSpec read_builder(const json& j, const std::string& path) {
  Obj o(j, path);
  BuilderSpec b;
  auto& p = b.profile;
  p.id = as_agent(o.need("id"), o.at("id"));
  o.opt("node", p.node, as_node);
  if (const json* v = o.get("flags")) {
    for (const auto& f : as_list(*v, o.at("flags"), scalar)) {
      if (f == "self_dealing") p.self_dealing = true;
      else if (f == "censoring") p.censoring = true;
      else if (f == "colluding") p.colluding = true;
      else if (f != "honest") throw ConfigError(o.at("flags"), "unknown builder flag '" + f + "'");
    }
  }
  p.honest = !(p.self_dealing || p.censoring || p.colluding);
  if (const json* v = o.get("coalition")) p.coalition = as_u32(*v, o.at("coalition"));
  o.opt("latency_advantage", p.latency_advantage, as_u64);
  o.opt("payment_fraction", p.payment_fraction, as_double);
  o.opt("tee_bound", p.tee_bound, as_bool);
  o.opt("accepts_private_flow", p.accepts_private_flow, as_bool);
  o.opt("budget", p.budget, as_amount);
  o.opt("balance_x", b.balance_x, as_amount);
  o.opt("balance_y", b.balance_y, as_amount);
  o.opt("prior_blocks", b.prior_blocks, as_u64);
  o.opt("prior_received", b.prior_received, as_u64);
  o.opt("prior_included", b.prior_included, as_u64);
  return b;
}

Scenario read_scenario(const json& doc) {
  Scenario s;
  Obj root(doc, "");
  if (const json* v = root.get("name")) s.name = scalar(*v, "name");
  if (const json* v = root.get("mode")) s.mode = as_enum(*v, "mode", parse_mode);
  if (const json* v = root.get("legacy_ordering")) s.legacy_ordering = as_enum(*v, "legacy_ordering", parse_legacy_mode);
  root.opt("rounds", s.rounds, as_u64);
  root.opt("ticks_per_round", s.ticks_per_round, as_u64);
  root.opt("seed", s.seed, as_u64);
  root.opt("gas_limit", s.gas_limit, as_u64);

  if (const json* v = root.get("network")) {
    Obj n(*v, "network");
    n.opt("nodes", s.nodes, as_u32);
    n.opt("default_latency", s.default_latency, as_u64);
    if (const json* ov = n.get("overrides")) {
      as_list(*ov, n.at("overrides"), [&](const json& e, const std::string& p) {
        Obj l(e, p);
        const NodeId from = as_node(l.need("from"), l.at("from"));
        const NodeId to = as_node(l.need("to"), l.at("to"));
        s.latency_overrides[{from, to}] = as_u64(l.need("latency"), l.at("latency"));
        return 0;
      });
    }
  }

  if (const json* v = root.get("pools")) {
    s.pools = as_list(*v, "pools", [](const json& e, const std::string& p) {
      Obj o(e, p);
      PoolSpec ps;
      ps.id = as_pool(o.need("id"), o.at("id"));
      ps.x = as_amount(o.need("x"), o.at("x"));
      ps.y = as_amount(o.need("y"), o.at("y"));
      o.opt("fee_bps", ps.fee_bps, as_u32);
      return ps;
    });
  }
  if (const json* v = root.get("users")) s.users = read_users(*v, "users");
  if (const json* v = root.get("searchers")) s.searchers = as_list(*v, "searchers", read_searcher);
  if (const json* v = root.get("builders")) s.builders = as_list(*v, "builders", read_builder);
  if (const json* v = root.get("relays")) {
    s.relays = as_list(*v, "relays", [&](const json& e, const std::string& p) {
      Obj o(e, p);
      RelayProfile r;
      r.id = as_agent(o.need("id"), o.at("id"));
      o.opt("regulated", r.regulated, as_bool);
      if (const json* b = o.get("builders")) r.builders = as_list(*b, o.at("builders"), as_agent);
      else
        for (const auto& b : s.builders) r.builders.push_back(b.profile.id);
      if (const json* f = o.get("favored_builder")) r.favored_builder = as_agent(*f, o.at("favored_builder"));
      return r;
    });
  }
  if (const json* v = root.get("proposers")) {
    s.proposers = as_list(*v, "proposers", [](const json& e, const std::string& p) {
      Obj o(e, p);
      ProposerSpec ps;
      ps.id = as_agent(o.need("id"), o.at("id"));
      o.opt("node", ps.node, as_node);
      o.opt("local_building", ps.local_building, as_bool);
      return ps;
    });
  }
  if (const json* v = root.get("market")) {
    Obj m(*v, "market");
    if (const json* r = m.get("routing")) s.routing = as_enum(*r, m.at("routing"), parse_routing_mode);
  }
  if (const json* v = root.get("policy")) {
    Obj p(*v, "policy");
    auto& pol = s.policy;
    if (const json* r = p.get("regulator")) {
      Obj o(*r, p.at("regulator"));
      o.opt("active", pol.regime.active, as_bool);
      o.opt("p_detect", pol.regime.p_detect, as_double);
      o.opt("penalty", pol.regime.penalty, as_amount);
      o.opt("id", pol.regulator, as_agent);
    }
    if (const json* t = p.get("tee")) {
      Obj o(*t, p.at("tee"));
      o.opt("overhead_gas", pol.tee_overhead_gas, as_u64);
    }
    if (const json* r = p.get("reputation")) {
      Obj o(*r, p.at("reputation"));
      o.opt("enabled", pol.reputation, as_bool);
      o.opt("gamma", pol.reputation_gamma, as_double);
    }
    if (const json* e = p.get("escalator")) {
      Obj o(*e, p.at("escalator"));
      o.opt("enabled", pol.escalator, as_bool);
      if (const json* x = o.get("extractors")) pol.extractors = as_list(*x, o.at("extractors"), as_agent);
      o.opt("bid_fraction", pol.escalator_bid_fraction, as_double);
    }
    if (const json* x = p.get("sanctions")) pol.sanctions = as_list(*x, p.at("sanctions"), as_agent);
  }

  // Defaults that depend on other fields.
  for (auto& sr : s.searchers)
    if (sr.config.watched_pools.empty())
      for (const auto& p : s.pools) sr.config.watched_pools.push_back(p.id);
  return s;
}

json parse_document(std::string_view text, std::string_view origin) {
  try {
    return to_json(YAML::Load(std::string(text)));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string(origin), std::string("parse error: ") + e.what());
  }
}

// --- Validation helpers -----------------------------------------------------------

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

void check_fraction(double v, const std::string& path) {
  check(v >= 0.0 && v <= 1.0, path, "must lie in [0, 1]");
}

}  // namespace

bool Scenario::operator==(const Scenario& o) const {
  auto relays_eq = [&] {
    if (relays.size() != o.relays.size()) return false;
    for (std::size_t i = 0; i < relays.size(); ++i) {
      const auto& a = relays[i];
      const auto& b = o.relays[i];
      if (a.id != b.id || a.regulated != b.regulated || a.builders != b.builders ||
          a.favored_builder != b.favored_builder)
        return false;
    }
    return true;
  };
  return name == o.name && mode == o.mode && legacy_ordering == o.legacy_ordering && rounds == o.rounds &&
         ticks_per_round == o.ticks_per_round && seed == o.seed && gas_limit == o.gas_limit && nodes == o.nodes &&
         default_latency == o.default_latency && latency_overrides == o.latency_overrides && pools == o.pools &&
         users == o.users && searchers == o.searchers && builders == o.builders && relays_eq() &&
         proposers == o.proposers && routing == o.routing && policy == o.policy;
}

void validate(const Scenario& s) {
  check(s.rounds >= 1, "rounds", "must be at least 1");
  check(s.ticks_per_round >= 1, "ticks_per_round", "must be at least 1");
  check(s.nodes >= 1, "network.nodes", "must be at least 1");
  check(s.gas_limit >= base_gas(TxKind::Swap), "gas_limit", "cannot fit a single swap");
  for (const auto& [pair, lat] : s.latency_overrides) {
    (void)lat;
    check(pair.first.value < s.nodes && pair.second.value < s.nodes, "network.overrides", "unknown node");
  }
  auto node_ok = [&](NodeId n, const std::string& path) { check(n.value < s.nodes, path, "unknown node"); };

  check(!s.pools.empty(), "pools", "at least one pool is required");
  std::set<PoolId> pool_ids;
  for (std::size_t i = 0; i < s.pools.size(); ++i) {
    const auto& p = s.pools[i];
    const std::string at = "pools." + std::to_string(i);
    check(pool_ids.insert(p.id).second, at + ".id", "duplicate pool id");
    check(!p.x.is_zero() && !p.y.is_zero(), at, "reserves must be positive");
    check(p.fee_bps <= kMaxFeeBps, at + ".fee_bps", "fee too large");
  }
  auto pool_ok = [&](PoolId p, const std::string& path) { check(pool_ids.contains(p), path, "unknown pool"); };

  std::set<AgentId> agents;
  auto claim = [&](AgentId a, const std::string& path) {
    check(a != kCoinbase, path, "agent id 0 is reserved");
    check(agents.insert(a).second, path, "agent id " + std::to_string(a.value) + " is used twice");
  };

  const auto& u = s.users;
  for (std::uint32_t i = 0; i < u.count; ++i) claim(u.id_at(i), "users");
  check(!u.amount_min.is_zero() && u.amount_min <= u.amount_max, "users.amount_min", "need 0 < amount_min <= amount_max");
  check(u.gas_price_min <= u.gas_price_max, "users.gas_price_min", "exceeds gas_price_max");
  check_fraction(u.slippage, "users.slippage");
  check_fraction(u.private_fraction, "users.private_fraction");
  check_fraction(u.yforx_fraction, "users.yforx_fraction");
  check_fraction(u.false_report_rate, "users.false_report_rate");
  check(u.report_threshold >= 0.0, "users.report_threshold", "must be non-negative");
  check(u.swaps_per_round == 0 || u.count > 0, "users.swaps_per_round", "random orders need users");
  for (std::size_t i = 0; i < u.pools.size(); ++i) pool_ok(u.pools[i], "users.pools." + std::to_string(i));
  for (std::size_t i = 0; i < u.scripted.size(); ++i) {
    const auto& o = u.scripted[i];
    const std::string at = "users.scripted." + std::to_string(i);
    check(u.contains(o.user), at + ".user", "not a user id");
    pool_ok(o.pool, at + ".pool");
    check(o.round >= 1 && o.round <= s.rounds, at + ".round", "outside 1..rounds");
    check(o.tick < s.ticks_per_round, at + ".tick", "must be below ticks_per_round");
    check(!o.amount_in.is_zero(), at + ".amount_in", "must be positive");
    check(o.route != Route::Private || s.mode == MarketMode::Pbs, at + ".route", "private routing needs pbs mode");
  }

  std::set<AgentId> searcher_ids;
  for (std::size_t i = 0; i < s.searchers.size(); ++i) {
    const auto& sr = s.searchers[i];
    const std::string at = "searchers." + std::to_string(i);
    claim(sr.config.id, at + ".id");
    searcher_ids.insert(sr.config.id);
    node_ok(sr.node, at + ".node");
    check(!sr.config.gas_bump.is_zero(), at + ".gas_bump", "must be positive");
    check(sr.snapshot_tick < s.ticks_per_round, at + ".snapshot_tick", "must be below ticks_per_round");
    for (std::size_t k = 0; k < sr.config.watched_pools.size(); ++k)
      pool_ok(sr.config.watched_pools[k], at + ".pools." + std::to_string(k));
  }

  std::set<AgentId> builder_ids;
  std::map<std::uint32_t, int> coalition_size;
  for (std::size_t i = 0; i < s.builders.size(); ++i) {
    const auto& b = s.builders[i];
    const std::string at = "builders." + std::to_string(i);
    claim(b.profile.id, at + ".id");
    builder_ids.insert(b.profile.id);
    node_ok(b.profile.node, at + ".node");
    try {
      b.profile.validate();
    } catch (const SimError& e) {
      throw ConfigError(at, e.what());
    }
    check(b.prior_included <= b.prior_received, at + ".prior_included", "exceeds prior_received");
    if (b.profile.colluding) coalition_size[*b.profile.coalition]++;
  }
  for (const auto& [c, n] : coalition_size) check(n >= 2, "builders", "coalition " + std::to_string(c) + " needs two colluding members");

  for (std::size_t i = 0; i < s.relays.size(); ++i) {
    const auto& r = s.relays[i];
    const std::string at = "relays." + std::to_string(i);
    claim(r.id, at + ".id");
    for (std::size_t k = 0; k < r.builders.size(); ++k)
      check(builder_ids.contains(r.builders[k]), at + ".builders." + std::to_string(k), "unknown builder");
    if (r.favored_builder) check(builder_ids.contains(*r.favored_builder), at + ".favored_builder", "unknown builder");
  }

  check(!s.proposers.empty(), "proposers", "at least one proposer is required");
  for (std::size_t i = 0; i < s.proposers.size(); ++i) {
    claim(s.proposers[i].id, "proposers." + std::to_string(i) + ".id");
    node_ok(s.proposers[i].node, "proposers." + std::to_string(i) + ".node");
  }

  if (s.mode == MarketMode::Pbs) {
    check(!s.builders.empty(), "builders", "pbs mode needs at least one builder");
    check(!s.relays.empty(), "relays", "pbs mode needs at least one relay");
  } else {
    check(s.builders.empty() && s.relays.empty(), "mode", "legacy mode has no builders or relays");
    check(u.private_fraction == 0.0, "users.private_fraction", "private routing needs pbs mode");
  }

  const auto& pol = s.policy;
  claim(pol.regulator, "policy.regulator.id");
  check_fraction(pol.regime.p_detect, "policy.regulator.p_detect");
  check(pol.reputation_gamma > 0.0, "policy.reputation.gamma", "must be positive");
  check(s.routing != RoutingMode::Reputation || pol.reputation, "market.routing", "reputation routing needs policy.reputation.enabled");
  check_fraction(pol.escalator_bid_fraction, "policy.escalator.bid_fraction");
  if (pol.escalator) {
    check(s.mode == MarketMode::Pbs, "policy.escalator.enabled", "the escalator needs pbs mode");
    check(!pol.extractors.empty(), "policy.escalator.extractors", "needs at least one extractor");
  }
  for (std::size_t i = 0; i < pol.extractors.size(); ++i)
    check(searcher_ids.contains(pol.extractors[i]), "policy.escalator.extractors." + std::to_string(i), "not a searcher");
  for (std::size_t i = 0; i < pol.sanctions.size(); ++i)
    check(agents.contains(pol.sanctions[i]), "policy.sanctions." + std::to_string(i), "unknown agent");
}

Scenario parse_scenario(std::string_view text, std::span<const Override> overrides, std::string_view origin) {
  json doc = parse_document(text, origin);
  for (const auto& ov : overrides) apply_override(doc, ov);
  Scenario s = read_scenario(doc);
  validate(s);
  return s;
}

Scenario parse_scenario(std::string_view text, std::string_view origin) { return parse_scenario(text, {}, origin); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

Override parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError(std::string(text), "expected path=value");
  return Override{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

std::string to_canonical_json(const Scenario& s) {
  auto amt = [](TokenAmount a) { return a.str(); };
  auto ids = [](const auto& v) {
    json a = json::array();
    for (const auto& id : v) a.push_back(id.value);
    return a;
  };

  json doc;
  doc["name"] = s.name;
  doc["mode"] = mode_name(s.mode);
  doc["legacy_ordering"] = to_string(s.legacy_ordering);
  doc["rounds"] = s.rounds;
  doc["ticks_per_round"] = s.ticks_per_round;
  doc["seed"] = s.seed;
  doc["gas_limit"] = s.gas_limit;

  json overrides = json::array();
  for (const auto& [pair, lat] : s.latency_overrides)
    overrides.push_back({{"from", pair.first.value}, {"to", pair.second.value}, {"latency", lat}});
  doc["network"] = {{"nodes", s.nodes}, {"default_latency", s.default_latency}, {"overrides", overrides}};

  doc["pools"] = json::array();
  for (const auto& p : s.pools)
    doc["pools"].push_back({{"id", p.id.value}, {"x", amt(p.x)}, {"y", amt(p.y)}, {"fee_bps", p.fee_bps}});

  const auto& u = s.users;
  json scripted = json::array();
  for (const auto& o : u.scripted) {
    json j = {{"round", o.round},
              {"tick", o.tick},
              {"user", o.user.value},
              {"pool", o.pool.value},
              {"direction", to_string(o.direction)},
              {"amount_in", amt(o.amount_in)},
              {"gas_price", amt(o.gas_price)},
              {"route", route_name(o.route)}};
    if (o.min_out) j["min_out"] = amt(*o.min_out);
    scripted.push_back(j);
  }
  doc["users"] = {{"count", u.count},
                  {"first_id", u.first_id},
                  {"balance_x", amt(u.balance_x)},
                  {"balance_y", amt(u.balance_y)},
                  {"swaps_per_round", u.swaps_per_round},
                  {"amount_min", amt(u.amount_min)},
                  {"amount_max", amt(u.amount_max)},
                  {"slippage", u.slippage},
                  {"gas_price_min", amt(u.gas_price_min)},
                  {"gas_price_max", amt(u.gas_price_max)},
                  {"private_fraction", u.private_fraction},
                  {"yforx_fraction", u.yforx_fraction},
                  {"pools", ids(u.pools)},
                  {"scripted", scripted},
                  {"report_threshold", u.report_threshold},
                  {"false_report_rate", u.false_report_rate}};

  doc["searchers"] = json::array();
  for (const auto& sr : s.searchers) {
    json strategies = json::array();
    for (auto k : sr.config.strategies) strategies.push_back(to_string(k));
    doc["searchers"].push_back({{"id", sr.config.id.value},
                                {"node", sr.node.value},
                                {"strategies", strategies},
                                {"pools", ids(sr.config.watched_pools)},
                                {"gas_bump", amt(sr.config.gas_bump)},
                                {"max_escalations", sr.config.max_escalations},
                                {"budget", amt(sr.config.budget)},
                                {"spam_copies", sr.config.spam_copies},
                                {"balance_x", amt(sr.balance_x)},
                                {"balance_y", amt(sr.balance_y)},
                                {"snapshot_tick", sr.snapshot_tick}});
  }

  doc["builders"] = json::array();
  for (const auto& b : s.builders) {
    const auto& p = b.profile;
    json flags = json::array();
    if (p.self_dealing) flags.push_back("self_dealing");
    if (p.censoring) flags.push_back("censoring");
    if (p.colluding) flags.push_back("colluding");
    json j = {{"id", p.id.value},
              {"node", p.node.value},
              {"flags", flags},
              {"latency_advantage", p.latency_advantage},
              {"payment_fraction", p.payment_fraction},
              {"tee_bound", p.tee_bound},
              {"accepts_private_flow", p.accepts_private_flow},
              {"budget", amt(p.budget)},
              {"balance_x", amt(b.balance_x)},
              {"balance_y", amt(b.balance_y)},
              {"prior_blocks", b.prior_blocks},
              {"prior_received", b.prior_received},
              {"prior_included", b.prior_included}};
    if (p.coalition) j["coalition"] = *p.coalition;
    doc["builders"].push_back(j);
  }

  doc["relays"] = json::array();
  for (const auto& r : s.relays) {
    json j = {{"id", r.id.value}, {"regulated", r.regulated}, {"builders", ids(r.builders)}};
    if (r.favored_builder) j["favored_builder"] = r.favored_builder->value;
    doc["relays"].push_back(j);
  }
  doc["proposers"] = json::array();
  for (const auto& p : s.proposers)
    doc["proposers"].push_back({{"id", p.id.value}, {"node", p.node.value}, {"local_building", p.local_building}});

  doc["market"] = {{"routing", to_string(s.routing)}};
  const auto& pol = s.policy;
  doc["policy"] = {
      {"regulator",
       {{"active", pol.regime.active},
        {"p_detect", pol.regime.p_detect},
        {"penalty", amt(pol.regime.penalty)},
        {"id", pol.regulator.value}}},
      {"tee", {{"overhead_gas", pol.tee_overhead_gas}}},
      {"reputation", {{"enabled", pol.reputation}, {"gamma", pol.reputation_gamma}}},
      {"escalator",
       {{"enabled", pol.escalator}, {"extractors", ids(pol.extractors)}, {"bid_fraction", pol.escalator_bid_fraction}}},
      {"sanctions", ids(pol.sanctions)}};
  return doc.dump(2) + "\n";
}

}  // namespace mevsim
