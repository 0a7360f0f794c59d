#include "mevsim/metrics.hpp"

#include <cmath>
#include <string>

namespace mevsim {

double compute_hhi(std::span<const double> shares) {
  if (shares.empty()) throw SimError(ErrorCode::BadShares, "no shares");
  double sum = 0.0, hhi = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw SimError(ErrorCode::BadShares, "negative share " + std::to_string(s));
    sum += s;
    hhi += s * s;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw SimError(ErrorCode::BadShares, "shares sum to " + std::to_string(sum));
  return hhi;
}

std::vector<double> shares_of(const std::map<AgentId, std::uint64_t>& counts) {
  std::vector<double> out;
  std::uint64_t total = 0;
  for (const auto& [id, n] : counts) total += n;
  for (const auto& [id, n] : counts)
    out.push_back(total == 0 ? 1.0 / static_cast<double>(counts.size())
                             : static_cast<double>(n) / static_cast<double>(total));
  return out;
}

std::string_view to_string(MevClass c) noexcept {
  switch (c) {
    case MevClass::Monarch: return "Monarch";
    case MevClass::Mafia: return "Mafia";
    case MevClass::Moloch: return "Moloch";
  }
  return "?";
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::User: return "User";
    case Role::Searcher: return "Searcher";
    case Role::Builder: return "Builder";
    case Role::Proposer: return "Proposer";
    case Role::Relay: return "Relay";
    case Role::Regulator: return "Regulator";
  }
  return "?";
}

MevClass classify_mev_event(const MevEvent& e) {
  if (e.kind == MevEvent::Kind::Waste) return MevClass::Moloch;
  if (e.actor == Role::Builder) return MevClass::Monarch;
  if (e.actor == Role::Searcher) return MevClass::Mafia;
  throw SimError(ErrorCode::UnclassifiableEvent, "extraction by a " + std::string(to_string(e.actor)));
}

CensorshipStats censorship_stats(std::span<const BlockCensorship> blocks, std::span<const SanctionedTx> txs) {
  CensorshipStats s;
  if (!blocks.empty()) {
    std::uint64_t clean = 0;
    for (const auto& b : blocks) clean += !b.touches_sanctioned;
    s.compliant_fraction = static_cast<double>(clean) / static_cast<double>(blocks.size());
  }
  double delay = 0.0;
  for (const auto& t : txs) {
    ++s.sanctioned_submitted;
    if (t.included_round) {
      ++s.sanctioned_included;
      delay += static_cast<double>(*t.included_round - t.submitted_round);
    } else {
      ++s.never_included;
    }
  }
  if (s.sanctioned_included > 0) s.mean_delay = delay / static_cast<double>(s.sanctioned_included);
  return s;
}

SignedAmount welfare_loss(const UserOutcome& cf, const UserOutcome& actual) {
  SignedAmount loss = SignedAmount::diff(actual.gas_paid, cf.gas_paid);
  const bool cf_swapped = cf.included && cf.status == TxStatus::Success;
  const bool act_swapped = actual.included && actual.status == TxStatus::Success;
  if (cf_swapped && act_swapped) loss += SignedAmount::diff(cf.amount_out, actual.amount_out);
  return loss;
}

KendallResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw SimError(ErrorCode::InvalidArgument, "kendall_tau: length mismatch");
  const std::size_t n = x.size();
  KendallResult r;
  if (n < 3) return r;

  // Pair counts plus tie groups for the tau-b denominator and the variance.
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[j] - x[i], dy = y[j] - y[i];
      if (dx == 0.0 || dy == 0.0) continue;
      s += (dx > 0) == (dy > 0) ? 1.0 : -1.0;
    }

  auto ties = [](std::span<const double> v) {
    std::map<double, double> groups;
    for (double e : v) groups[e] += 1.0;
    struct Sums {
      double t1 = 0, t2 = 0, tv = 0;  // sum t(t-1)/2, sum t(t-1)(t-2), sum t(t-1)(2t+5)
    } out;
    for (const auto& [value, t] : groups) {
      out.t1 += t * (t - 1) / 2;
      out.t2 += t * (t - 1) * (t - 2);
      out.tv += t * (t - 1) * (2 * t + 5);
    }
    return out;
  };
  const auto tx = ties(x), ty = ties(y);
  const double nd = static_cast<double>(n);
  const double n0 = nd * (nd - 1) / 2;
  const double denom = std::sqrt((n0 - tx.t1) * (n0 - ty.t1));
  if (denom == 0.0) return r;
  r.tau = s / denom;

  const double var = (nd * (nd - 1) * (2 * nd + 5) - tx.tv - ty.tv) / 18 +
                     (2 * tx.t1) * (2 * ty.t1) / (2 * nd * (nd - 1)) +
                     tx.t2 * ty.t2 / (9 * nd * (nd - 1) * (nd - 2));
  if (var <= 0.0) return r;
  r.z = s / std::sqrt(var);
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

}  // namespace mevsim
