#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "mevsim/error.hpp"

namespace mevsim {

inline constexpr std::uint64_t kScale = 1'000'000;

/// Non-negative fixed-point quantity, stored as an integer count of millionths.
/// Every operation that can produce a fractional millionth rounds down.
class TokenAmount {
public:
  constexpr TokenAmount() = default;

  static constexpr TokenAmount from_millionths(std::uint64_t m) noexcept { return TokenAmount(m); }
  static constexpr TokenAmount units(std::uint64_t whole) noexcept { return TokenAmount(whole * kScale); }
  /// Parses "123", "123.4", "0.000001". More than 6 fractional digits is an error.
  static TokenAmount parse(std::string_view text);

  constexpr std::uint64_t millionths() const noexcept { return raw_; }
  constexpr bool is_zero() const noexcept { return raw_ == 0; }
  double to_double() const noexcept { return static_cast<double>(raw_) / static_cast<double>(kScale); }
  std::string str() const;

  constexpr auto operator<=>(const TokenAmount&) const = default;

  constexpr TokenAmount operator+(TokenAmount o) const noexcept { return TokenAmount(raw_ + o.raw_); }
  TokenAmount operator-(TokenAmount o) const {
    if (o.raw_ > raw_) throw SimError(ErrorCode::NegativeAmount, str() + " - " + o.str());
    return TokenAmount(raw_ - o.raw_);
  }
  TokenAmount& operator+=(TokenAmount o) noexcept {
    raw_ += o.raw_;
    return *this;
  }
  TokenAmount& operator-=(TokenAmount o) { return *this = *this - o; }

  /// max(this - o, 0)
  constexpr TokenAmount saturating_sub(TokenAmount o) const noexcept {
    return TokenAmount(o.raw_ > raw_ ? 0 : raw_ - o.raw_);
  }
  /// Price-per-unit times an integer count (gas_price * gas_used).
  constexpr TokenAmount times(std::uint64_t count) const noexcept { return TokenAmount(raw_ * count); }
  /// floor(this * num / den)
  TokenAmount scaled(std::uint64_t num, std::uint64_t den) const;
  /// floor(this * f) for a fraction f in [0, 1], resolved to 1e-9.
  TokenAmount fraction(double f) const;

private:
  constexpr explicit TokenAmount(std::uint64_t raw) noexcept : raw_(raw) {}
  std::uint64_t raw_ = 0;
};

/// Signed millionths, used for profits, losses and deltas.
class SignedAmount {
public:
  constexpr SignedAmount() = default;
  static constexpr SignedAmount from_millionths(std::int64_t m) noexcept { return SignedAmount(m); }
  static SignedAmount diff(TokenAmount a, TokenAmount b) noexcept {
    return SignedAmount(static_cast<std::int64_t>(a.millionths()) - static_cast<std::int64_t>(b.millionths()));
  }
  static SignedAmount of(TokenAmount a) noexcept { return SignedAmount(static_cast<std::int64_t>(a.millionths())); }
  static SignedAmount parse(std::string_view text);

  constexpr std::int64_t millionths() const noexcept { return raw_; }
  double to_double() const noexcept { return static_cast<double>(raw_) / static_cast<double>(kScale); }
  std::string str() const;

  constexpr auto operator<=>(const SignedAmount&) const = default;
  constexpr SignedAmount operator+(SignedAmount o) const noexcept { return SignedAmount(raw_ + o.raw_); }
  constexpr SignedAmount operator-(SignedAmount o) const noexcept { return SignedAmount(raw_ - o.raw_); }
  constexpr SignedAmount operator-() const noexcept { return SignedAmount(-raw_); }
  SignedAmount& operator+=(SignedAmount o) noexcept {
    raw_ += o.raw_;
    return *this;
  }
  SignedAmount& operator-=(SignedAmount o) noexcept {
    raw_ -= o.raw_;
    return *this;
  }

private:
  constexpr explicit SignedAmount(std::int64_t raw) noexcept : raw_(raw) {}
  std::int64_t raw_ = 0;
};

namespace literals {
constexpr TokenAmount operator""_tok(unsigned long long whole) { return TokenAmount::units(whole); }
constexpr TokenAmount operator""_micro(unsigned long long m) { return TokenAmount::from_millionths(m); }
}  // namespace literals

}  // namespace mevsim
