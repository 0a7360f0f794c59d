#include "mevsim/amm.hpp"

#include <algorithm>
#include <string>
#include <tuple>

namespace mevsim {

namespace {

using u128 = unsigned __int128;
constexpr std::uint64_t kBpsDen = 10'000;

struct Sides {
  std::uint64_t in;
  std::uint64_t out;
};

Sides sides(const Pool& p, Direction d) {
  return d == Direction::YforX ? Sides{p.reserve_y().millionths(), p.reserve_x().millionths()}
                               : Sides{p.reserve_x().millionths(), p.reserve_y().millionths()};
}

// Continuous swap output and its derivative, used only to steer bisection.
long double cont_out(long double rin, long double rout, long double gamma, long double a) {
  return rout * gamma * a / (rin + gamma * a);
}
long double cont_out_derivative(long double rin, long double rout, long double gamma, long double a) {
  const long double d = rin + gamma * a;
  return gamma * rin * rout / (d * d);
}

}  // namespace

std::string_view to_string(Asset a) noexcept { return a == Asset::X ? "X" : "Y"; }
std::string_view to_string(Direction d) noexcept { return d == Direction::XforY ? "XforY" : "YforX"; }

Asset parse_asset(std::string_view s) {
  if (s == "X") return Asset::X;
  if (s == "Y") return Asset::Y;
  throw SimError(ErrorCode::InvalidArgument, "unknown asset '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  if (s == "XforY") return Direction::XforY;
  if (s == "YforX") return Direction::YforX;
  throw SimError(ErrorCode::InvalidArgument, "unknown direction '" + std::string(s) + "'");
}

Pool::Pool(PoolId id, TokenAmount reserve_x, TokenAmount reserve_y, std::uint32_t fee_bps)
    : id_(id), reserve_x_(reserve_x), reserve_y_(reserve_y), fee_bps_(fee_bps) {
  if (reserve_x.is_zero() || reserve_y.is_zero()) throw SimError(ErrorCode::ZeroReserve, "pool reserves must be positive");
  if (fee_bps > kMaxFeeBps) throw SimError(ErrorCode::InvalidArgument, "fee_bps above 1000");
}

TokenAmount quote_swap(const Pool& pool, Direction dir, TokenAmount amount_in) {
  if (amount_in.is_zero()) throw SimError(ErrorCode::InvalidArgument, "quote of zero input");
  const auto [rin, rout] = sides(pool, dir);
  if (rin == 0 || rout == 0) throw SimError(ErrorCode::ZeroReserve, "empty reserve");
  const std::uint64_t gamma = kBpsDen - pool.fee_bps();
  const u128 effective = static_cast<u128>(amount_in.millionths()) * gamma;
  const u128 num = static_cast<u128>(rout) * effective;
  const u128 den = static_cast<u128>(rin) * kBpsDen + effective;
  return TokenAmount::from_millionths(static_cast<std::uint64_t>(num / den));
}

std::pair<Pool, TokenAmount> apply_swap(const Pool& pool, Direction dir, TokenAmount amount_in) {
  const TokenAmount out = quote_swap(pool, dir, amount_in);
  Pool next = pool;
  if (dir == Direction::YforX) {
    next.reserve_y_ += amount_in;
    next.reserve_x_ -= out;
  } else {
    next.reserve_x_ += amount_in;
    next.reserve_y_ -= out;
  }
  return {next, out};
}

double realized_slippage(TokenAmount quoted_out, TokenAmount executed_out) {
  if (quoted_out.is_zero()) throw SimError(ErrorCode::InvalidArgument, "slippage against a zero quote");
  return (quoted_out.to_double() - executed_out.to_double()) / quoted_out.to_double();
}

SandwichOutcome simulate_sandwich(const Pool& pool, const SwapIntent& victim, TokenAmount front_in) {
  Pool p = pool;
  TokenAmount front_out;
  if (!front_in.is_zero()) std::tie(p, front_out) = apply_swap(p, victim.direction, front_in);

  TokenAmount victim_out = quote_swap(p, victim.direction, victim.amount_in);
  const bool reverted = victim_out < victim.min_out;
  if (reverted) {
    victim_out = {};
  } else {
    p = apply_swap(p, victim.direction, victim.amount_in).first;
  }

  TokenAmount back_out;
  if (!front_out.is_zero()) std::tie(p, back_out) = apply_swap(p, reverse(victim.direction), front_out);

  return SandwichOutcome{front_out, victim_out, reverted, back_out, SignedAmount::diff(back_out, front_in), p};
}

TokenAmount optimal_frontrun_size(const Pool& pool, const SwapIntent& victim, TokenAmount budget) {
  auto victim_clears = [&](std::uint64_t front) {
    Pool p = pool;
    if (front > 0) p = apply_swap(p, victim.direction, TokenAmount::from_millionths(front)).first;
    return quote_swap(p, victim.direction, victim.amount_in) >= victim.min_out;
  };

  // Invariant: lo clears, hi does not (or hi is one past the budget).
  std::uint64_t lo = 0;
  std::uint64_t hi = budget.millionths() + 1;
  if (victim_clears(budget.millionths())) {
    lo = budget.millionths();
  } else {
    for (int iter = 0; iter < 64 && hi - lo > 1; ++iter) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (victim_clears(mid) ? lo : hi) = mid;
    }
  }
  if (lo == 0) return {};
  const TokenAmount size = TokenAmount::from_millionths(lo);
  // Floor rounding can let a few-millionth front-run through a zero-tolerance
  // quote; such dust never pays.
  if (simulate_sandwich(pool, victim, size).profit <= SignedAmount{}) return {};
  return size;
}

RoundTrip simulate_round_trip(const Pool& buy_on, const Pool& sell_on, TokenAmount y_in) {
  const TokenAmount x_mid = quote_swap(buy_on, Direction::YforX, y_in);
  const TokenAmount y_out = x_mid.is_zero() ? TokenAmount{} : quote_swap(sell_on, Direction::XforY, x_mid);
  return RoundTrip{y_in, x_mid, y_out};
}

std::optional<RoundTrip> best_round_trip(const Pool& buy_on, const Pool& sell_on, TokenAmount budget) {
  if (budget.is_zero()) return std::nullopt;
  const long double ga = static_cast<long double>(kBpsDen - buy_on.fee_bps()) / kBpsDen;
  const long double gb = static_cast<long double>(kBpsDen - sell_on.fee_bps()) / kBpsDen;
  const long double ya = buy_on.reserve_y().to_double(), xa = buy_on.reserve_x().to_double();
  const long double xb = sell_on.reserve_x().to_double(), yb = sell_on.reserve_y().to_double();

  auto marginal = [&](long double a) {
    const long double x = cont_out(ya, xa, ga, a);
    return cont_out_derivative(xb, yb, gb, x) * cont_out_derivative(ya, xa, ga, a) - 1.0L;
  };
  if (marginal(0.0L) <= 0.0L) return std::nullopt;

  long double lo = 0.0L;
  long double hi = budget.to_double();
  if (marginal(hi) > 0.0L) {
    lo = hi;
  } else {
    for (int iter = 0; iter < 200 && hi - lo > 1e-7L; ++iter) {
      const long double mid = (lo + hi) / 2;
      (marginal(mid) > 0.0L ? lo : hi) = mid;
    }
  }
  auto size = TokenAmount::from_millionths(static_cast<std::uint64_t>(lo * static_cast<long double>(kScale)));
  size = std::min(size, budget);
  if (size.is_zero()) return std::nullopt;
  RoundTrip trip = simulate_round_trip(buy_on, sell_on, size);
  if (trip.profit() <= SignedAmount{}) return std::nullopt;
  return trip;
}

}  // namespace mevsim
