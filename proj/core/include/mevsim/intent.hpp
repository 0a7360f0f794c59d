#pragma once

#include "mevsim/amount.hpp"
#include "mevsim/types.hpp"

namespace mevsim {

/// A swap order. min_out is the sender's slippage floor.
struct SwapIntent {
  PoolId pool;
  Direction direction = Direction::YforX;
  TokenAmount amount_in;
  TokenAmount min_out;

  SwapIntent(PoolId pool_id, Direction dir, TokenAmount in, TokenAmount floor_out = {})
      : pool(pool_id), direction(dir), amount_in(in), min_out(floor_out) {
    if (amount_in.is_zero()) throw SimError(ErrorCode::InvalidArgument, "swap amount_in must be positive");
  }

  bool operator==(const SwapIntent&) const = default;
};

struct TransferIntent {
  AgentId to;
  Asset asset = Asset::Y;
  TokenAmount amount;

  TransferIntent(AgentId recipient, Asset a, TokenAmount amt) : to(recipient), asset(a), amount(amt) {
    if (amount.is_zero()) throw SimError(ErrorCode::InvalidArgument, "transfer amount must be positive");
  }

  bool operator==(const TransferIntent&) const = default;
};

}  // namespace mevsim
