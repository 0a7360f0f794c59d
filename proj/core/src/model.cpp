#include "mevsim/model.hpp"

#include <string>
#include <unordered_set>

namespace mevsim {

std::string_view to_string(TxKind k) noexcept {
  switch (k) {
    case TxKind::Swap: return "Swap";
    case TxKind::Transfer: return "Transfer";
    case TxKind::Noop: return "Noop";
  }
  return "?";
}

TxKind parse_tx_kind(std::string_view s) {
  if (s == "Swap") return TxKind::Swap;
  if (s == "Transfer") return TxKind::Transfer;
  if (s == "Noop") return TxKind::Noop;
  throw SimError(ErrorCode::InvalidArgument, "unknown tx kind '" + std::string(s) + "'");
}

std::string_view to_string(TxStatus s) noexcept {
  switch (s) {
    case TxStatus::Success: return "Success";
    case TxStatus::Reverted: return "Reverted";
    case TxStatus::Dropped: return "Dropped";
  }
  return "?";
}

// --- Transaction -----------------------------------------------------------

Transaction Transaction::swap(TxId id, AgentId sender, SwapIntent intent, TokenAmount gas_price,
                              std::uint64_t origin_round) {
  Transaction t;
  t.id_ = id;
  t.sender_ = sender;
  t.kind_ = TxKind::Swap;
  t.swap_ = intent;
  t.gas_price_ = gas_price;
  t.gas_used_ = base_gas(TxKind::Swap);
  t.origin_round_ = origin_round;
  return t;
}

Transaction Transaction::transfer(TxId id, AgentId sender, TransferIntent intent, TokenAmount gas_price,
                                  std::uint64_t origin_round) {
  Transaction t;
  t.id_ = id;
  t.sender_ = sender;
  t.kind_ = TxKind::Transfer;
  t.transfer_ = intent;
  t.gas_price_ = gas_price;
  t.gas_used_ = base_gas(TxKind::Transfer);
  t.origin_round_ = origin_round;
  return t;
}

Transaction Transaction::noop(TxId id, AgentId sender, TokenAmount gas_price, std::uint64_t origin_round) {
  Transaction t;
  t.id_ = id;
  t.sender_ = sender;
  t.kind_ = TxKind::Noop;
  t.gas_price_ = gas_price;
  t.gas_used_ = base_gas(TxKind::Noop);
  t.origin_round_ = origin_round;
  return t;
}

Transaction Transaction::restore(TxId id, AgentId sender, TxKind kind, std::optional<SwapIntent> swap,
                                 std::optional<TransferIntent> transfer, TokenAmount gas_price,
                                 std::uint64_t gas_used, std::uint64_t origin_round) {
  if (gas_used == 0) throw SimError(ErrorCode::InvalidArgument, "gas_used must be positive");
  if ((kind == TxKind::Swap) != swap.has_value() || (kind == TxKind::Transfer) != transfer.has_value())
    throw SimError(ErrorCode::InvalidArgument, "payload does not match tx kind");
  Transaction t;
  t.id_ = id;
  t.sender_ = sender;
  t.kind_ = kind;
  t.swap_ = std::move(swap);
  t.transfer_ = std::move(transfer);
  t.gas_price_ = gas_price;
  t.gas_used_ = gas_used;
  t.origin_round_ = origin_round;
  return t;
}

// --- Bundle / Block --------------------------------------------------------

Bundle::Bundle(std::vector<Transaction> txs, AgentId submitter) : txs_(std::move(txs)), submitter_(submitter) {
  if (txs_.empty()) throw SimError(ErrorCode::InvalidArgument, "bundle must not be empty");
}

std::uint64_t Bundle::total_gas() const noexcept {
  std::uint64_t g = 0;
  for (const auto& t : txs_) g += t.gas_used();
  return g;
}

TokenAmount Bundle::total_fees() const noexcept {
  TokenAmount f;
  for (const auto& t : txs_) f += t.gas_cost();
  return f;
}

TokenAmount Bundle::effective_gas_price() const noexcept {
  return TokenAmount::from_millionths(total_fees().millionths() / total_gas());
}

bool Bundle::contains(TxId id) const noexcept {
  for (const auto& t : txs_)
    if (t.id() == id) return true;
  return false;
}

void Block::append(const Bundle& bundle) {
  spans_.push_back(BundleSpan{payload_.size(), bundle.txs().size()});
  payload_.insert(payload_.end(), bundle.txs().begin(), bundle.txs().end());
}

void Block::reset_payload(std::vector<Transaction> payload, std::vector<BundleSpan> spans) {
  payload_ = std::move(payload);
  spans_ = std::move(spans);
}

std::uint64_t Block::gas_used() const noexcept {
  std::uint64_t g = 0;
  for (const auto& t : payload_) g += t.gas_used();
  return g;
}

bool Block::contains(TxId id) const noexcept {
  for (const auto& t : payload_)
    if (t.id() == id) return true;
  return false;
}

// --- ChainState ------------------------------------------------------------

const Pool& ChainState::pool(PoolId id) const {
  auto it = pools_.find(id);
  if (it == pools_.end()) throw SimError(ErrorCode::UnknownPool, "pool " + std::to_string(id.value));
  return it->second;
}

TokenAmount ChainState::balance(AgentId agent, Asset asset) const noexcept {
  auto it = balances_.find(BalanceKey{agent, asset});
  return it == balances_.end() ? TokenAmount{} : it->second;
}

TokenAmount ChainState::total_supply(Asset asset) const noexcept {
  TokenAmount total;
  for (const auto& [key, amount] : balances_)
    if (key.asset == asset) total += amount;
  for (const auto& [id, pool] : pools_) total += pool.reserve(asset);
  return total;
}

void ChainState::add_pool(const Pool& pool) {
  if (!pools_.emplace(pool.id(), pool).second)
    throw SimError(ErrorCode::InvalidArgument, "duplicate pool " + std::to_string(pool.id().value));
}

void ChainState::set_pool(const Pool& pool) {
  auto it = pools_.find(pool.id());
  if (it == pools_.end()) throw SimError(ErrorCode::UnknownPool, "pool " + std::to_string(pool.id().value));
  it->second = pool;
}

void ChainState::credit(AgentId agent, Asset asset, TokenAmount amount) {
  if (amount.is_zero()) return;
  balances_[BalanceKey{agent, asset}] += amount;
}

void ChainState::debit(AgentId agent, Asset asset, TokenAmount amount) {
  if (amount.is_zero()) return;
  auto it = balances_.find(BalanceKey{agent, asset});
  if (it == balances_.end() || it->second < amount)
    throw SimError(ErrorCode::InsufficientBalance, "agent " + std::to_string(agent.value));
  it->second -= amount;
}

// --- Execution -------------------------------------------------------------

namespace {

Receipt dropped(const Transaction& tx, ErrorCode why) { return Receipt{tx.id(), TxStatus::Dropped, {}, {}, why}; }

void charge_gas(ChainState& s, const Transaction& tx, AgentId fee_recipient) {
  const TokenAmount gas = tx.gas_cost();
  s.debit(tx.sender(), kGasAsset, gas);
  s.credit(fee_recipient, kGasAsset, gas);
}

bool covers(const ChainState& s, AgentId who, Asset asset, TokenAmount amount, TokenAmount gas) {
  if (asset == kGasAsset) return s.balance(who, asset) >= amount + gas;
  return s.balance(who, asset) >= amount && s.balance(who, kGasAsset) >= gas;
}

}  // namespace

Receipt apply_transaction(ChainState& state, const Transaction& tx, AgentId fee_recipient) {
  if (state.is_included(tx.id())) throw SimError(ErrorCode::DuplicateTx, "tx " + std::to_string(tx.id().value));
  const TokenAmount gas = tx.gas_cost();

  switch (tx.kind()) {
    case TxKind::Swap: {
      const SwapIntent& in = *tx.swap_intent();
      if (!state.has_pool(in.pool)) return dropped(tx, ErrorCode::UnknownPool);
      const Asset pay = input_asset(in.direction);
      if (!covers(state, tx.sender(), pay, in.amount_in, gas)) return dropped(tx, ErrorCode::InsufficientBalance);

      const Pool& pool = state.pool(in.pool);
      if (quote_swap(pool, in.direction, in.amount_in) < in.min_out) {
        charge_gas(state, tx, fee_recipient);
        state.mark_included(tx.id());
        return Receipt{tx.id(), TxStatus::Reverted, {}, gas, std::nullopt};
      }
      auto [next, out] = apply_swap(pool, in.direction, in.amount_in);
      state.debit(tx.sender(), pay, in.amount_in);
      charge_gas(state, tx, fee_recipient);
      state.set_pool(next);
      state.credit(tx.sender(), output_asset(in.direction), out);
      state.mark_included(tx.id());
      return Receipt{tx.id(), TxStatus::Success, out, gas, std::nullopt};
    }
    case TxKind::Transfer: {
      const TransferIntent& in = *tx.transfer_intent();
      if (!covers(state, tx.sender(), in.asset, in.amount, gas)) return dropped(tx, ErrorCode::InsufficientBalance);
      state.debit(tx.sender(), in.asset, in.amount);
      charge_gas(state, tx, fee_recipient);
      state.credit(in.to, in.asset, in.amount);
      state.mark_included(tx.id());
      return Receipt{tx.id(), TxStatus::Success, {}, gas, std::nullopt};
    }
    case TxKind::Noop: {
      if (state.balance(tx.sender(), kGasAsset) < gas) return dropped(tx, ErrorCode::InsufficientBalance);
      charge_gas(state, tx, fee_recipient);
      state.mark_included(tx.id());
      return Receipt{tx.id(), TxStatus::Success, {}, gas, std::nullopt};
    }
  }
  return dropped(tx, ErrorCode::InvalidArgument);
}

std::pair<ChainState, Receipt> execute_transaction(const ChainState& state, const Transaction& tx,
                                                   AgentId fee_recipient) {
  ChainState next = state;
  Receipt r = apply_transaction(next, tx, fee_recipient);
  return {std::move(next), r};
}

namespace {

void validate_block(const ChainState& state, const Block& block) {
  if (block.height() != state.height() + 1)
    throw SimError(ErrorCode::InvalidArgument,
                   "block height " + std::to_string(block.height()) + " on chain height " + std::to_string(state.height()));
  if (block.gas_used() > block.gas_limit())
    throw SimError(ErrorCode::GasLimitExceeded,
                   std::to_string(block.gas_used()) + " > " + std::to_string(block.gas_limit()));
  std::unordered_set<TxId> seen;
  for (const auto& tx : block.payload()) {
    if (!seen.insert(tx.id()).second || state.is_included(tx.id()))
      throw SimError(ErrorCode::DuplicateTx, "tx " + std::to_string(tx.id().value));
  }
  std::size_t next_free = 0;
  for (const auto& span : block.spans()) {
    if (span.count == 0 || span.first < next_free || span.first + span.count > block.payload().size())
      throw SimError(ErrorCode::BundleContiguity, "bad bundle span");
    next_free = span.first + span.count;
  }
}

void execute_span(ChainState& s, std::span<const Transaction> txs, AgentId builder, std::vector<Receipt>& out) {
  const ChainState before = s;
  const std::size_t base = out.size();
  bool any_dropped = false;
  bool any_reverted = false;
  for (const auto& tx : txs) {
    Receipt r = apply_transaction(s, tx, builder);
    any_dropped |= r.status == TxStatus::Dropped;
    any_reverted |= r.status == TxStatus::Reverted;
    out.push_back(r);
    if (any_dropped) break;
  }
  if (!any_dropped && !any_reverted) return;

  s = before;
  out.resize(base);
  for (const auto& tx : txs) {
    if (any_dropped) {
      out.push_back(Receipt{tx.id(), TxStatus::Dropped, {}, {}, ErrorCode::BundleAborted});
      continue;
    }
    // The whole bundle reverts; each member still pays what gas it can.
    const TokenAmount gas = std::min(tx.gas_cost(), s.balance(tx.sender(), kGasAsset));
    s.debit(tx.sender(), kGasAsset, gas);
    s.credit(builder, kGasAsset, gas);
    s.mark_included(tx.id());
    out.push_back(Receipt{tx.id(), TxStatus::Reverted, {}, gas, std::nullopt});
  }
}

}  // namespace

std::pair<ChainState, std::vector<Receipt>> execute_block(const ChainState& state, const Block& block) {
  validate_block(state, block);
  ChainState s = state;
  std::vector<Receipt> receipts;
  receipts.reserve(block.payload().size());

  const auto& payload = block.payload();
  std::size_t i = 0;
  auto span_it = block.spans().begin();
  while (i < payload.size()) {
    if (span_it != block.spans().end() && span_it->first == i) {
      execute_span(s, std::span<const Transaction>(payload).subspan(i, span_it->count), block.builder(), receipts);
      i += span_it->count;
      ++span_it;
    } else {
      receipts.push_back(apply_transaction(s, payload[i], block.builder()));
      ++i;
    }
  }

  if (block.builder() != block.proposer() && !block.bid().is_zero()) {
    s.debit(block.builder(), kGasAsset, block.bid());
    s.credit(block.proposer(), kGasAsset, block.bid());
  }
  s.set_height(block.height());
  return {std::move(s), std::move(receipts)};
}

std::pair<ChainState, TokenAmount> collect_penalty(const ChainState& state, AgentId from, AgentId to, Asset asset,
                                                   TokenAmount amount) {
  ChainState s = state;
  const TokenAmount taken = std::min(amount, s.balance(from, asset));
  s.debit(from, asset, taken);
  s.credit(to, asset, taken);
  return {std::move(s), taken};
}

namespace {

struct Fnv {
  std::uint64_t h = 14695981039346656037ull;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
};

}  // namespace

std::uint64_t state_hash(const ChainState& state) noexcept {
  Fnv f;
  f.u64(state.height());
  for (const auto& [id, p] : state.pools()) {
    f.u64(id.value);
    f.u64(p.reserve_x().millionths());
    f.u64(p.reserve_y().millionths());
    f.u64(p.fee_bps());
  }
  for (const auto& [key, amount] : state.balances()) {
    if (amount.is_zero()) continue;
    f.u64(key.agent.value);
    f.u64(static_cast<std::uint64_t>(key.asset));
    f.u64(amount.millionths());
  }
  for (const auto& id : state.included()) f.u64(id.value);
  return f.h;
}

}  // namespace mevsim
