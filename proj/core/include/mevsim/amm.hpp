#pragma once

#include <optional>
#include <utility>

#include "mevsim/amount.hpp"
#include "mevsim/intent.hpp"
#include "mevsim/types.hpp"

namespace mevsim {

/// Two-asset constant-product market. Both reserves stay strictly positive.
class Pool {
public:
  Pool(PoolId id, TokenAmount reserve_x, TokenAmount reserve_y, std::uint32_t fee_bps = 0);

  PoolId id() const noexcept { return id_; }
  TokenAmount reserve_x() const noexcept { return reserve_x_; }
  TokenAmount reserve_y() const noexcept { return reserve_y_; }
  TokenAmount reserve(Asset a) const noexcept { return a == Asset::X ? reserve_x_ : reserve_y_; }
  std::uint32_t fee_bps() const noexcept { return fee_bps_; }

  /// Price of one X in units of Y.
  double spot_price() const noexcept { return reserve_y_.to_double() / reserve_x_.to_double(); }

  bool operator==(const Pool&) const = default;

private:
  friend std::pair<Pool, TokenAmount> apply_swap(const Pool&, Direction, TokenAmount);

  PoolId id_;
  TokenAmount reserve_x_;
  TokenAmount reserve_y_;
  std::uint32_t fee_bps_ = 0;
};

inline constexpr std::uint32_t kMaxFeeBps = 1000;

/// out = reserve_out - k / (reserve_in + amount_in * (1 - fee)), floored. Pool unchanged.
TokenAmount quote_swap(const Pool& pool, Direction dir, TokenAmount amount_in);

/// Same output as quote_swap; reserves move by (+amount_in, -amount_out).
std::pair<Pool, TokenAmount> apply_swap(const Pool& pool, Direction dir, TokenAmount amount_in);

/// (quoted - executed) / quoted. Negative means price improvement.
double realized_slippage(TokenAmount quoted_out, TokenAmount executed_out);

/// Result of running [front, victim, back] on a pool in isolation.
struct SandwichOutcome {
  TokenAmount front_out;   // victim's output asset acquired by the front leg
  TokenAmount victim_out;  // zero when the victim reverts
  bool victim_reverted = false;
  TokenAmount back_out;    // victim's input asset recovered by the back leg
  SignedAmount profit;     // back_out - front_in, in the victim's input asset
  Pool pool_after;
};

SandwichOutcome simulate_sandwich(const Pool& pool, const SwapIntent& victim, TokenAmount front_in);

/// Largest front-run input (<= budget) that still lets the victim clear min_out.
/// Returns zero when no size both respects min_out and leaves a strictly
/// positive round-trip profit.
TokenAmount optimal_frontrun_size(const Pool& pool, const SwapIntent& victim, TokenAmount budget);

/// Two-pool round trip that pays Y on `buy_on`, receives X, and sells that X on `sell_on`.
struct RoundTrip {
  TokenAmount y_in;
  TokenAmount x_mid;
  TokenAmount y_out;
  SignedAmount profit() const noexcept { return SignedAmount::diff(y_out, y_in); }
};

RoundTrip simulate_round_trip(const Pool& buy_on, const Pool& sell_on, TokenAmount y_in);

/// Profit-maximizing Y input for the round trip, found by bisection on the
/// marginal return and capped by budget. nullopt when the best trade is not
/// strictly profitable.
std::optional<RoundTrip> best_round_trip(const Pool& buy_on, const Pool& sell_on, TokenAmount budget);

}  // namespace mevsim
