#include "mevsim/pbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace mevsim {

struct PbsAccess {
  static ChannelKey key() { return ChannelKey{}; }
};

void BuilderProfile::validate() const {
  if (honest && (self_dealing || censoring || colluding))
    throw SimError(ErrorCode::InvalidArgument, "honest builder cannot carry other policy flags");
  if (!honest && !(self_dealing || censoring || colluding))
    throw SimError(ErrorCode::InvalidArgument, "non-honest builder needs a policy flag");
  if (colluding && !coalition) throw SimError(ErrorCode::InvalidArgument, "colluding builder needs a coalition id");
  if (!(payment_fraction >= 0.0 && payment_fraction <= 1.0))
    throw SimError(ErrorCode::InvalidArgument, "payment_fraction outside [0,1]");
}

bool RelayProfile::connected(AgentId builder) const noexcept {
  return std::find(builders.begin(), builders.end(), builder) != builders.end();
}

// --- InclusionStats ---------------------------------------------------------

void InclusionStats::seed(AgentId builder, std::uint64_t received, std::uint64_t included) {
  if (included > received) throw SimError(ErrorCode::InvalidArgument, "included exceeds received");
  counters_[builder] = Counters{received, included};
}

void InclusionStats::record_received(AgentId builder, std::uint64_t n) { counters_[builder].received += n; }

void InclusionStats::record_included(AgentId builder, std::uint64_t n) {
  auto& c = counters_[builder];
  c.included = std::min(c.received, c.included + n);
}

std::uint64_t InclusionStats::received(AgentId builder) const noexcept {
  auto it = counters_.find(builder);
  return it == counters_.end() ? 0 : it->second.received;
}

std::uint64_t InclusionStats::included(AgentId builder) const noexcept {
  auto it = counters_.find(builder);
  return it == counters_.end() ? 0 : it->second.included;
}

double InclusionStats::inclusion_rate(AgentId builder) const noexcept {
  return (static_cast<double>(included(builder)) + 1.0) / (static_cast<double>(received(builder)) + 2.0);
}

// --- Sanctions ----------------------------------------------------------------

bool SanctionsList::touches(const Transaction& tx) const noexcept {
  if (agents_.contains(tx.sender())) return true;
  return tx.transfer_intent() && agents_.contains(tx.transfer_intent()->to);
}

bool SanctionsList::touches(const Block& block) const noexcept {
  return std::any_of(block.payload().begin(), block.payload().end(), [&](const Transaction& t) { return touches(t); });
}

// --- Block building -------------------------------------------------------------

namespace {

// Priced as fees / gas, compared exactly rather than through a floored quotient.
struct Unit {
  std::vector<Transaction> txs;
  bool bundle = false;
  bool pinned = false;  // coalition back legs go first
  TokenAmount fees;
  std::uint64_t gas = 1;

  static Unit of(std::vector<Transaction> txs, bool bundle, bool pinned = false) {
    Unit u{std::move(txs), bundle, pinned, {}, 0};
    for (const auto& t : u.txs) {
      u.fees += t.gas_cost();
      u.gas += t.gas_used();
    }
    return u;
  }
};

bool pricier(const Unit& l, const Unit& r) {
  using u128 = unsigned __int128;
  return static_cast<u128>(l.fees.millionths()) * r.gas > static_cast<u128>(r.fees.millionths()) * l.gas;
}

struct Packed {
  std::vector<Transaction> payload;
  std::vector<BundleSpan> spans;
};

/// Greedy packing against a scratch copy of the head state.
Packed pack(std::vector<Unit> units, const ChainState& head, std::uint64_t gas_limit, std::uint64_t per_tx_overhead,
            AgentId builder) {
  std::stable_sort(units.begin(), units.end(), [](const Unit& l, const Unit& r) {
    if (l.pinned != r.pinned) return l.pinned;
    if (pricier(l, r)) return true;
    if (pricier(r, l)) return false;
    return l.txs.front().id() < r.txs.front().id();
  });

  Packed out;
  ChainState scratch = head;
  std::unordered_set<TxId> taken;
  std::uint64_t gas_left = gas_limit;
  for (const Unit& u : units) {
    std::uint64_t gas = 0;
    bool clash = false;
    for (const auto& t : u.txs) {
      gas += t.gas_used() + per_tx_overhead;
      clash |= taken.contains(t.id()) || head.is_included(t.id());
    }
    if (clash || gas > gas_left) continue;

    if (u.bundle) {
      ChainState trial = scratch;
      bool ok = true;
      for (const auto& t : u.txs) {
        if (apply_transaction(trial, t, builder).status != TxStatus::Success) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      scratch = std::move(trial);
      out.spans.push_back(BundleSpan{out.payload.size(), u.txs.size()});
    } else {
      // Reverting public transactions still pay; unfunded ones are skipped.
      if (apply_transaction(scratch, u.txs.front(), builder).status == TxStatus::Dropped) continue;
    }
    for (const auto& t : u.txs) {
      taken.insert(t.id());
      out.payload.push_back(t);
    }
    gas_left -= gas;
  }
  return out;
}

struct VictimPick {
  std::size_t unit_index;
  Transaction victim;
  SandwichPlan plan;
};

/// Most profitable user order in the builder's private flow, sandwiched on
/// the builder's own account.
std::optional<VictimPick> best_private_victim(const std::vector<Unit>& units, const BuilderProfile& profile,
                                              const BuildRequest& req) {
  if (!req.ids) return std::nullopt;
  std::optional<VictimPick> best;
  IdSequence scratch_ids(req.ids->peek());
  // Pinned coalition legs run first, so plan against the state they leave.
  ChainState base = req.head;
  for (const Unit& u : units)
    if (u.pinned)
      for (const auto& t : u.txs) apply_transaction(base, t, profile.id);
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    if (!u.bundle || u.pinned || u.txs.size() != 1) continue;
    const Transaction& tx = u.txs.front();
    if (tx.kind() != TxKind::Swap || tx.sender() == profile.id) continue;
    const SwapIntent& intent = *tx.swap_intent();
    if (!base.has_pool(intent.pool)) continue;
    SearcherConfig own;
    own.id = profile.id;
    own.budget = std::min(profile.budget, base.balance(profile.id, input_asset(intent.direction)));
    own.gas_bump = TokenAmount::from_millionths(1);
    if (own.budget.is_zero()) continue;
    try {
      SandwichPlan plan = craft_sandwich(tx, base.pool(intent.pool), own, CraftContext{scratch_ids, req.round});
      if (!best || plan.expected.profit > best->plan.expected.profit) best = VictimPick{i, tx, std::move(plan)};
    } catch (const SimError& e) {
      if (e.code() != ErrorCode::NoProfitableSize) throw;
    }
  }
  return best;
}

/// Re-issues the picked sandwich with real ids and zero gas (the builder pays itself).
std::pair<Transaction, Transaction> own_legs(const VictimPick& pick, const BuilderProfile& profile,
                                             const BuildRequest& req) {
  const auto& legs = pick.plan.bundle.txs();
  const SwapIntent& f = *legs.front().swap_intent();
  const SwapIntent& b = *legs.back().swap_intent();
  Transaction front = Transaction::swap(req.ids->next(), profile.id, f, {}, req.round);
  Transaction back = Transaction::swap(req.ids->next(), profile.id, b, {}, req.round);
  return {std::move(front), std::move(back)};
}

SignedAmount own_gain(const OwnExtraction& x, const std::vector<Transaction>& payload,
                      const std::vector<Receipt>& receipts) {
  const Receipt* front = nullptr;
  const Receipt* back = nullptr;
  TokenAmount front_in;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (payload[i].id() == x.front) {
      front = &receipts[i];
      front_in = payload[i].swap_intent()->amount_in;
    }
    if (payload[i].id() == x.back) back = &receipts[i];
  }
  if (!front || !back || front->status != TxStatus::Success || back->status != TxStatus::Success) return {};
  return SignedAmount::diff(back->amount_out, front_in);
}

}  // namespace

BuildResult builder_build_block(const BuilderProfile& profile, const BuildRequest& req) {
  std::vector<Unit> units;
  for (const auto& leg : req.reserved_back_legs) units.push_back(Unit::of({leg}, false, true));
  for (const auto& tx : req.public_view) units.push_back(Unit::of({tx}, false));
  for (const auto& q : req.mempool.private_channel(profile.id, PbsAccess::key()))
    units.push_back(Unit::of(q.bundle.txs(), true));

  if (profile.censoring) {
    std::erase_if(units, [&](const Unit& u) {
      return std::any_of(u.txs.begin(), u.txs.end(), [&](const Transaction& t) { return req.sanctions.touches(t); });
    });
  }

  const std::uint64_t overhead = profile.tee_bound ? req.tee_overhead_gas : 0;
  BuildResult result{Block(req.head.height() + 1, profile.id, req.gas_limit), {}, {}, {}, std::nullopt, std::nullopt};

  auto profit_of = [&](const Packed& packed, const std::vector<OwnExtraction>& own, ChainState* after) {
    Block probe(req.head.height() + 1, profile.id, req.gas_limit);
    probe.reset_payload(packed.payload, packed.spans);
    auto [state, receipts] = execute_block(req.head, probe);
    TokenAmount fees;
    for (std::size_t i = 0; i < receipts.size(); ++i)
      if (packed.payload[i].sender() != profile.id) fees += receipts[i].gas_paid;
    SignedAmount total = SignedAmount::of(fees);
    for (const auto& x : own)
      if (!x.deferred) total += own_gain(x, packed.payload, receipts);
    if (after) *after = std::move(state);
    return std::pair{fees, total > SignedAmount{} ? TokenAmount::from_millionths(static_cast<std::uint64_t>(total.millionths()))
                                                  : TokenAmount{}};
  };

  std::vector<OwnExtraction> own;
  std::optional<VictimPick> pick;
  if ((profile.self_dealing || profile.colluding) && req.ids) pick = best_private_victim(units, profile, req);

  if (pick && profile.colluding && req.regime) {
    const auto [h_fees, h] = profit_of(pack(units, req.head, req.gas_limit, overhead, profile.id), {}, nullptr);
    (void)h_fees;
    const TokenAmount extra = TokenAmount::from_millionths(static_cast<std::uint64_t>(pick->plan.expected.profit.millionths()));
    result.collusion = collusion_decision(h, h + extra, *req.regime);
    if (result.collusion->choice == CollusionChoice::Collude) {
      auto [front, back] = own_legs(*pick, profile, req);
      own.push_back(OwnExtraction{front.id(), pick->victim.id(), back.id(), true, extra});
      Unit& u = units[pick->unit_index];
      u.txs = {front, pick->victim};
      result.deferred_back_leg = back;
      result.colluded = true;
      pick.reset();
    }
  }
  if (pick && profile.self_dealing) {
    auto [front, back] = own_legs(*pick, profile, req);
    const TokenAmount extra = TokenAmount::from_millionths(static_cast<std::uint64_t>(pick->plan.expected.profit.millionths()));
    own.push_back(OwnExtraction{front.id(), pick->victim.id(), back.id(), false, extra});
    Unit& u = units[pick->unit_index];
    u.txs = {front, pick->victim, back};
  }

  Packed packed = pack(std::move(units), req.head, req.gas_limit, overhead, profile.id);
  // Own sandwiches that did not survive packing are not extractions.
  std::erase_if(own, [&](const OwnExtraction& x) {
    return std::none_of(packed.payload.begin(), packed.payload.end(), [&](const Transaction& t) { return t.id() == x.front; });
  });
  if (result.colluded && own.empty()) {
    result.colluded = false;
    result.deferred_back_leg.reset();
  }

  if (profile.tee_bound) {
    if (!req.tee_rng) throw SimError(ErrorCode::InvalidArgument, "TEE-bound builder needs a generator");
    packed.payload = tee_shuffle(with_tee_overhead(packed.payload, overhead), *req.tee_rng);
    packed.spans.clear();
  }

  ChainState after;
  const auto [fees, profit] = profit_of(packed, own, &after);
  result.fees = fees;
  result.profit = profit;
  result.extractions = std::move(own);

  TokenAmount bid = profit.fraction(profile.payment_fraction);
  if (after.balance(profile.id, kGasAsset) < bid) bid = {};
  result.block.reset_payload(std::move(packed.payload), std::move(packed.spans));
  result.block.set_bid(bid);
  return result;
}

std::vector<Bundle> pending_private_bundles(const Mempool& mempool, AgentId builder) {
  std::vector<Bundle> out;
  for (const auto& q : mempool.private_channel(builder, PbsAccess::key())) out.push_back(q.bundle);
  return out;
}

// --- Relay / proposer ---------------------------------------------------------------

std::optional<Bid> relay_select(std::span<const Bid> bids, const RelayProfile& relay, const SanctionsList& sanctions) {
  const Bid* best = nullptr;
  for (const Bid& b : bids) {
    if (!relay.connected(b.builder)) continue;
    if (relay.regulated && sanctions.touches(b.block)) continue;
    if (relay.favored_builder && b.builder == *relay.favored_builder) return b;
    if (!best || b.amount > best->amount || (b.amount == best->amount && b.builder < best->builder)) best = &b;
  }
  if (!best) return std::nullopt;
  return *best;
}

Block proposer_select(std::span<const Bid> relay_offers, const std::optional<LocalBlock>& local) {
  const Bid* best = nullptr;
  for (const Bid& b : relay_offers)
    if (!best || b.amount > best->amount || (b.amount == best->amount && b.builder < best->builder)) best = &b;
  if (local && (!best || local->profit > best->amount)) return local->block;
  if (!best) throw SimError(ErrorCode::NothingToPropose, "no relay offers and no local block");
  return best->block;
}

// --- Routing -------------------------------------------------------------------------

std::string_view to_string(RoutingMode m) noexcept {
  switch (m) {
    case RoutingMode::Rate: return "rate";
    case RoutingMode::Uniform: return "uniform";
    case RoutingMode::Reputation: return "reputation";
  }
  return "?";
}

RoutingMode parse_routing_mode(std::string_view s) {
  for (auto m : {RoutingMode::Rate, RoutingMode::Uniform, RoutingMode::Reputation})
    if (to_string(m) == s) return m;
  throw SimError(ErrorCode::InvalidArgument, "unknown routing mode '" + std::string(s) + "'");
}

AgentId route_order_flow(std::span<const AgentId> builders, const InclusionStats& stats, RoutingMode mode, Rng& rng,
                         const ReputationLedger* reputation, double gamma) {
  if (builders.empty()) throw SimError(ErrorCode::InvalidArgument, "no active builders to route to");
  std::vector<AgentId> sorted(builders.begin(), builders.end());
  std::sort(sorted.begin(), sorted.end());

  switch (mode) {
    case RoutingMode::Rate: {
      AgentId best = sorted.front();
      for (AgentId b : sorted)
        if (stats.inclusion_rate(b) > stats.inclusion_rate(best)) best = b;
      return best;
    }
    case RoutingMode::Uniform:
      return sorted[static_cast<std::size_t>(rng.below(sorted.size()))];
    case RoutingMode::Reputation: {
      if (!reputation) throw SimError(ErrorCode::InvalidArgument, "reputation routing without a ledger");
      std::vector<double> weights;
      double total = 0.0;
      for (AgentId b : sorted) {
        weights.push_back(std::pow(reputation->score(b), gamma));
        total += weights.back();
      }
      if (total <= 0.0) return sorted[static_cast<std::size_t>(rng.below(sorted.size()))];
      double pick = rng.unit() * total;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (pick < weights[i]) return sorted[i];
        pick -= weights[i];
      }
      return sorted.back();
    }
  }
  return sorted.front();
}

// --- Legacy mining ---------------------------------------------------------------------

std::string_view to_string(LegacyMode m) noexcept { return m == LegacyMode::Naive ? "naive" : "greedy"; }

LegacyMode parse_legacy_mode(std::string_view s) {
  if (s == "naive") return LegacyMode::Naive;
  if (s == "greedy") return LegacyMode::Greedy;
  throw SimError(ErrorCode::InvalidArgument, "unknown legacy mode '" + std::string(s) + "'");
}

Block miner_build_legacy(std::span<const Transaction> view, LegacyMode mode, AgentId miner, const ChainState& head,
                         std::uint64_t gas_limit) {
  std::vector<Transaction> order(view.begin(), view.end());
  if (mode == LegacyMode::Greedy) {
    std::stable_sort(order.begin(), order.end(), [](const Transaction& l, const Transaction& r) {
      if (l.gas_price() != r.gas_price()) return l.gas_price() > r.gas_price();
      return l.id() < r.id();
    });
  }
  Block block(head.height() + 1, miner, gas_limit);
  std::uint64_t gas_left = gas_limit;
  std::unordered_set<TxId> taken;
  for (const auto& tx : order) {
    if (tx.gas_used() > gas_left || head.is_included(tx.id()) || !taken.insert(tx.id()).second) continue;
    block.append(tx);
    gas_left -= tx.gas_used();
  }
  return block;
}

}  // namespace mevsim
