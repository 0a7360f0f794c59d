#include "mevsim/amount.hpp"

#include <charconv>
#include <cmath>

namespace mevsim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeAmount: return "NegativeAmount";
    case ErrorCode::UnknownPool: return "UnknownPool";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::InsufficientBalance: return "InsufficientBalance";
    case ErrorCode::ZeroReserve: return "ZeroReserve";
    case ErrorCode::GasLimitExceeded: return "GasLimitExceeded";
    case ErrorCode::DuplicateTx: return "DuplicateTx";
    case ErrorCode::BundleContiguity: return "BundleContiguity";
    case ErrorCode::BundleAborted: return "BundleAborted";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::BuilderRejectsPrivateFlow: return "BuilderRejectsPrivateFlow";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoProfitableSize: return "NoProfitableSize";
    case ErrorCode::NoProfit: return "NoProfit";
    case ErrorCode::NothingToPropose: return "NothingToPropose";
    case ErrorCode::DuplicateReport: return "DuplicateReport";
    case ErrorCode::UnknownInclusion: return "UnknownInclusion";
    case ErrorCode::BadShares: return "BadShares";
    case ErrorCode::UnclassifiableEvent: return "UnclassifiableEvent";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::LogFormat: return "LogFormat";
  }
  return "Unknown";
}

namespace {

std::uint64_t parse_unsigned_millionths(std::string_view text, std::string_view original) {
  auto bad = [&] { return SimError(ErrorCode::InvalidArgument, "malformed amount '" + std::string(original) + "'"); };
  if (text.empty()) throw bad();
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw bad();
  if (frac.size() > 6) throw bad();

  std::uint64_t w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size()) throw bad();
  }
  std::uint64_t f = 0;
  if (!frac.empty()) {
    auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
    if (ec != std::errc{} || p != frac.data() + frac.size()) throw bad();
    for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  }
  if (w > (UINT64_MAX - f) / kScale) throw bad();
  return w * kScale + f;
}

std::string format_millionths(std::uint64_t raw, bool negative) {
  std::string frac = std::to_string(raw % kScale);
  frac.insert(0, 6 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(raw / kScale) + "." + frac;
}

}  // namespace

TokenAmount TokenAmount::parse(std::string_view text) {
  return TokenAmount(parse_unsigned_millionths(text, text));
}

std::string TokenAmount::str() const { return format_millionths(raw_, false); }

TokenAmount TokenAmount::scaled(std::uint64_t num, std::uint64_t den) const {
  if (den == 0) throw SimError(ErrorCode::InvalidArgument, "scaled by x/0");
  const unsigned __int128 r = static_cast<unsigned __int128>(raw_) * num / den;
  return TokenAmount(static_cast<std::uint64_t>(r));
}

TokenAmount TokenAmount::fraction(double f) const {
  if (!(f >= 0.0 && f <= 1.0)) throw SimError(ErrorCode::InvalidArgument, "fraction outside [0,1]");
  constexpr std::uint64_t kDen = 1'000'000'000;
  return scaled(static_cast<std::uint64_t>(std::llround(f * static_cast<double>(kDen))), kDen);
}

SignedAmount SignedAmount::parse(std::string_view text) {
  const bool neg = !text.empty() && text.front() == '-';
  const auto m = static_cast<std::int64_t>(parse_unsigned_millionths(neg ? text.substr(1) : text, text));
  return SignedAmount(neg ? -m : m);
}

std::string SignedAmount::str() const {
  const bool neg = raw_ < 0;
  const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(raw_ + 1)) + 1 : static_cast<std::uint64_t>(raw_);
  return format_millionths(mag, neg);
}

}  // namespace mevsim
