#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "mevsim/amm.hpp"
#include "mevsim/amount.hpp"
#include "mevsim/intent.hpp"
#include "mevsim/types.hpp"

namespace mevsim {

enum class TxKind : std::uint8_t { Swap, Transfer, Noop };

std::string_view to_string(TxKind k) noexcept;
TxKind parse_tx_kind(std::string_view s);

/// Flat gas schedule per transaction kind.
constexpr std::uint64_t base_gas(TxKind k) noexcept {
  switch (k) {
    case TxKind::Swap: return 100;
    case TxKind::Transfer: return 21;
    case TxKind::Noop: return 10;
  }
  return 0;
}

/// Gas is always paid in asset Y.
inline constexpr Asset kGasAsset = Asset::Y;

class Transaction {
public:
  static Transaction swap(TxId id, AgentId sender, SwapIntent intent, TokenAmount gas_price, std::uint64_t origin_round);
  static Transaction transfer(TxId id, AgentId sender, TransferIntent intent, TokenAmount gas_price,
                              std::uint64_t origin_round);
  static Transaction noop(TxId id, AgentId sender, TokenAmount gas_price, std::uint64_t origin_round);

  TxId id() const noexcept { return id_; }
  AgentId sender() const noexcept { return sender_; }
  TxKind kind() const noexcept { return kind_; }
  const std::optional<SwapIntent>& swap_intent() const noexcept { return swap_; }
  const std::optional<TransferIntent>& transfer_intent() const noexcept { return transfer_; }
  TokenAmount gas_price() const noexcept { return gas_price_; }
  std::uint64_t gas_used() const noexcept { return gas_used_; }
  std::uint64_t origin_round() const noexcept { return origin_round_; }
  TokenAmount gas_cost() const noexcept { return gas_price_.times(gas_used_); }

  Transaction with_gas_price(TokenAmount p) const {
    Transaction t = *this;
    t.gas_price_ = p;
    return t;
  }
  Transaction with_extra_gas(std::uint64_t extra) const {
    Transaction t = *this;
    t.gas_used_ += extra;
    return t;
  }
  /// Rebuilds a transaction from logged fields; gas_used must be positive.
  static Transaction restore(TxId id, AgentId sender, TxKind kind, std::optional<SwapIntent> swap,
                             std::optional<TransferIntent> transfer, TokenAmount gas_price, std::uint64_t gas_used,
                             std::uint64_t origin_round);

  bool operator==(const Transaction&) const = default;

private:
  Transaction() = default;

  TxId id_;
  AgentId sender_;
  TxKind kind_ = TxKind::Noop;
  std::optional<SwapIntent> swap_;
  std::optional<TransferIntent> transfer_;
  TokenAmount gas_price_;
  std::uint64_t gas_used_ = 0;
  std::uint64_t origin_round_ = 0;
};

/// Atomic, ordered group of transactions.
class Bundle {
public:
  Bundle(std::vector<Transaction> txs, AgentId submitter);

  const std::vector<Transaction>& txs() const noexcept { return txs_; }
  AgentId submitter() const noexcept { return submitter_; }
  std::uint64_t total_gas() const noexcept;
  TokenAmount total_fees() const noexcept;
  /// Total fees over total gas, floored.
  TokenAmount effective_gas_price() const noexcept;
  bool contains(TxId id) const noexcept;

  bool operator==(const Bundle&) const = default;

private:
  std::vector<Transaction> txs_;
  AgentId submitter_;
};

/// Half-open index range [first, first+count) of a bundle inside a block payload.
struct BundleSpan {
  std::size_t first = 0;
  std::size_t count = 0;
  bool operator==(const BundleSpan&) const = default;
};

inline constexpr std::uint64_t kDefaultGasLimit = 10'000;

class Block {
public:
  Block(std::uint64_t height, AgentId builder, std::uint64_t gas_limit = kDefaultGasLimit)
      : height_(height), builder_(builder), proposer_(builder), gas_limit_(gas_limit) {}

  void append(const Transaction& tx) { payload_.push_back(tx); }
  void append(const Bundle& bundle);
  void set_bid(TokenAmount bid) noexcept { bid_ = bid; }
  void set_proposer(AgentId p) noexcept { proposer_ = p; }
  /// Replaces payload and spans, used by the TEE shuffle and log replay.
  void reset_payload(std::vector<Transaction> payload, std::vector<BundleSpan> spans);

  std::uint64_t height() const noexcept { return height_; }
  AgentId builder() const noexcept { return builder_; }
  AgentId proposer() const noexcept { return proposer_; }
  const std::vector<Transaction>& payload() const noexcept { return payload_; }
  const std::vector<BundleSpan>& spans() const noexcept { return spans_; }
  TokenAmount bid() const noexcept { return bid_; }
  std::uint64_t gas_limit() const noexcept { return gas_limit_; }
  std::uint64_t gas_used() const noexcept;
  bool contains(TxId id) const noexcept;

  bool operator==(const Block&) const = default;

private:
  std::uint64_t height_ = 0;
  AgentId builder_;
  AgentId proposer_;
  std::vector<Transaction> payload_;
  std::vector<BundleSpan> spans_;
  TokenAmount bid_;
  std::uint64_t gas_limit_ = kDefaultGasLimit;
};

enum class TxStatus : std::uint8_t { Success, Reverted, Dropped };
std::string_view to_string(TxStatus s) noexcept;

struct Receipt {
  TxId tx;
  TxStatus status = TxStatus::Dropped;
  TokenAmount amount_out;  // realized swap output; zero unless Success
  TokenAmount gas_paid;
  std::optional<ErrorCode> error;  // reason for Dropped

  bool operator==(const Receipt&) const = default;
};

struct BalanceKey {
  AgentId agent;
  Asset asset = Asset::Y;
  auto operator<=>(const BalanceKey&) const = default;
};

class ChainState {
public:
  ChainState() = default;

  std::uint64_t height() const noexcept { return height_; }
  const std::map<PoolId, Pool>& pools() const noexcept { return pools_; }
  const std::map<BalanceKey, TokenAmount>& balances() const noexcept { return balances_; }
  const std::set<TxId>& included() const noexcept { return included_; }

  const Pool& pool(PoolId id) const;
  bool has_pool(PoolId id) const noexcept { return pools_.contains(id); }
  TokenAmount balance(AgentId agent, Asset asset) const noexcept;
  bool is_included(TxId id) const noexcept { return included_.contains(id); }
  /// Sum of an asset across every balance and every pool reserve.
  TokenAmount total_supply(Asset asset) const noexcept;

  // Genesis and mutation primitives. Execution goes through the free
  // functions below; these exist for setup and in-place block execution.
  void add_pool(const Pool& pool);
  void set_pool(const Pool& pool);
  void credit(AgentId agent, Asset asset, TokenAmount amount);
  void debit(AgentId agent, Asset asset, TokenAmount amount);
  void mark_included(TxId id) { included_.insert(id); }
  void set_height(std::uint64_t h) noexcept { height_ = h; }

  bool operator==(const ChainState&) const = default;

private:
  std::uint64_t height_ = 0;
  std::map<PoolId, Pool> pools_;
  std::map<BalanceKey, TokenAmount> balances_;
  std::set<TxId> included_;
};

/// Executes one transaction and credits its gas to fee_recipient.
/// A min_out miss yields Reverted with gas charged; an unknown pool or an
/// unfunded sender yields Dropped with the state untouched.
/// Throws DuplicateTx when the transaction is already on chain.
std::pair<ChainState, Receipt> execute_transaction(const ChainState& state, const Transaction& tx,
                                                   AgentId fee_recipient = kCoinbase);

/// In-place variant used by execute_block and builders' simulations.
Receipt apply_transaction(ChainState& state, const Transaction& tx, AgentId fee_recipient);

/// Executes a block payload strictly in order. Bundles are all-or-nothing:
/// any revert inside a span reverts every member (gas still charged), any drop
/// drops every member. The builder collects all gas; the proposer receives the
/// bid from the builder afterwards.
/// Throws GasLimitExceeded, DuplicateTx, BundleContiguity or InsufficientBalance
/// (unfunded bid); the input state is never modified.
std::pair<ChainState, std::vector<Receipt>> execute_block(const ChainState& state, const Block& block);

/// Forced transfer of up to `amount` of `asset` (used for regulator penalties).
/// Returns the new state and what was actually collected.
std::pair<ChainState, TokenAmount> collect_penalty(const ChainState& state, AgentId from, AgentId to, Asset asset,
                                                   TokenAmount amount);

/// 64-bit FNV-1a over a canonical serialization of the state.
std::uint64_t state_hash(const ChainState& state) noexcept;

}  // namespace mevsim
