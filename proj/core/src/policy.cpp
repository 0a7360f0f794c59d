#include "mevsim/policy.hpp"

#include <algorithm>
#include <string>

namespace mevsim {

void RegulatoryRegime::validate() const {
  if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw SimError(ErrorCode::InvalidArgument, "p_detect outside [0,1]");
}

CollusionVerdict collusion_decision(TokenAmount honest_profit, TokenAmount collusive_profit,
                                    const RegulatoryRegime& regime) {
  const double p = regime.effective_p();
  const double h = honest_profit.to_double();
  const double c = collusive_profit.to_double();
  if (c <= h) return {CollusionChoice::Honest, 0.0};
  const double threshold = p == 0.0 ? std::numeric_limits<double>::infinity() : (c - h) / p;
  const double expected_fine = p * regime.penalty.to_double();
  return {c - expected_fine > h ? CollusionChoice::Collude : CollusionChoice::Honest, threshold};
}

std::vector<PenaltyAssessment> regulator_audit(std::span<const ColludingBlock> blocks, const RegulatoryRegime& regime,
                                               Rng& rng) {
  std::vector<PenaltyAssessment> out;
  if (!regime.active) return out;
  for (const auto& block : blocks) {
    if (!rng.bernoulli(regime.p_detect)) continue;
    for (AgentId member : block.coalition) out.push_back({block.height, member, regime.penalty});
  }
  return out;
}

CollusionGameResult run_collusion_game(TokenAmount honest_profit, TokenAmount collusive_profit,
                                       const RegulatoryRegime& regime, std::size_t coalition_size,
                                       std::uint64_t rounds, Rng& rng) {
  if (coalition_size < 2) throw SimError(ErrorCode::InvalidArgument, "a coalition needs two members");
  std::vector<AgentId> coalition;
  for (std::size_t i = 0; i < coalition_size; ++i) coalition.emplace_back(static_cast<std::uint32_t>(i + 1));

  CollusionGameResult result;
  result.rounds = rounds;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    // Members are symmetric, so they all reach the same verdict; a lone
    // defector would forfeit the collusive payoff and earn h.
    const bool all_in = std::all_of(coalition.begin(), coalition.end(), [&](AgentId) {
      return collusion_decision(honest_profit, collusive_profit, regime).choice == CollusionChoice::Collude;
    });
    if (!all_in) continue;
    ++result.colluding_rounds;
    const ColludingBlock block{r + 1, coalition};
    const auto penalties = regulator_audit(std::span(&block, 1), regime, rng);
    if (!penalties.empty()) ++result.detections;
    for (const auto& p : penalties) result.penalties += p.amount;
  }
  return result;
}

std::vector<Transaction> tee_shuffle(std::vector<Transaction> payload, Rng& rng) {
  rng.shuffle(std::span<Transaction>(payload));
  return payload;
}

std::vector<Transaction> with_tee_overhead(std::span<const Transaction> payload, std::uint64_t overhead_gas) {
  std::vector<Transaction> out;
  out.reserve(payload.size());
  for (const auto& tx : payload) out.push_back(tx.with_extra_gas(overhead_gas));
  return out;
}

double spam_success_probability(std::uint64_t k) {
  return static_cast<double>(k) / static_cast<double>(k + 1);
}

std::uint64_t ReputationLedger::inclusions(AgentId builder) const noexcept {
  auto it = counters_.find(builder);
  return it == counters_.end() ? 0 : it->second.inclusions;
}

std::uint64_t ReputationLedger::reports(AgentId builder) const noexcept {
  auto it = counters_.find(builder);
  return it == counters_.end() ? 0 : it->second.reports;
}

double ReputationLedger::score(AgentId builder) const noexcept {
  const double i = static_cast<double>(inclusions(builder));
  const double r = static_cast<double>(reports(builder));
  return std::clamp((i - r + 1.0) / (i + 2.0), 0.0, 1.0);
}

void ReputationLedger::apply(AgentId builder, const ReputationEvent& event) {
  if (event.kind == ReputationEvent::Kind::Included) {
    if (!included_.emplace(std::pair{builder, event.tx}, event.user).second)
      throw SimError(ErrorCode::DuplicateTx, "inclusion of tx " + std::to_string(event.tx.value) + " already recorded");
    ++counters_[builder].inclusions;
    return;
  }
  auto it = included_.find({builder, event.tx});
  if (it == included_.end() || it->second != event.user)
    throw SimError(ErrorCode::UnknownInclusion, "tx " + std::to_string(event.tx.value) + " not included by builder " +
                                                    std::to_string(builder.value) + " for this user");
  if (!reported_.emplace(event.user, event.tx).second)
    throw SimError(ErrorCode::DuplicateReport, "tx " + std::to_string(event.tx.value));
  ++counters_[builder].reports;
}

ReputationLedger reputation_update(ReputationLedger ledger, AgentId builder, const ReputationEvent& event) {
  ledger.apply(builder, event);
  return ledger;
}

void EscalatorAuction::submit_bid(AgentId extractor, TokenAmount rebate, TokenAmount extractable_value) {
  if (settled_) throw SimError(ErrorCode::InvalidArgument, "auction already settled");
  if (rebate > extractable_value)
    throw SimError(ErrorCode::InvalidArgument, "rebate " + rebate.str() + " exceeds extractable " + extractable_value.str());
  if (!bids_.emplace(extractor, rebate).second)
    throw SimError(ErrorCode::InvalidArgument, "extractor " + std::to_string(extractor.value) + " already bid");
}

EscalatorResult EscalatorAuction::settle() {
  settled_ = true;
  return fee_escalator_auction(order_, bids_);
}

EscalatorResult fee_escalator_auction(const Transaction&, const std::map<AgentId, TokenAmount>& bids) {
  EscalatorResult result;
  for (const auto& [extractor, rebate] : bids) {
    // std::map iterates ids ascending, so strict > keeps the lowest id on ties.
    if (!result.winner || rebate > result.rebate) {
      result.winner = extractor;
      result.rebate = rebate;
    }
  }
  return result;
}

}  // namespace mevsim
