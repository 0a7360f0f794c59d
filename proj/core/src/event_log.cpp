#include "mevsim/event_log.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace mevsim {

namespace {

[[noreturn]] void bad(const std::string& what) { throw SimError(ErrorCode::LogFormat, what); }

std::uint64_t to_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) bad("bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::uint32_t to_u32(std::string_view s, std::string_view what) {
  const auto v = to_u64(s, what);
  if (v > UINT32_MAX) bad(std::string(what) + " out of range");
  return static_cast<std::uint32_t>(v);
}

TokenAmount to_amount(std::string_view s) {
  try {
    return TokenAmount::parse(s);
  } catch (const SimError&) {
    bad("bad amount '" + std::string(s) + "'");
  }
}

template <class F>
auto wrap(F f, std::string_view what) {
  try {
    return f();
  } catch (const SimError& e) {
    if (e.code() == ErrorCode::LogFormat) throw;
    bad(std::string(what) + ": " + e.what());
  }
}

std::optional<ErrorCode> parse_error(std::string_view s) {
  if (s == "-") return std::nullopt;
  for (int i = 0; i <= static_cast<int>(ErrorCode::LogFormat); ++i)
    if (to_string(static_cast<ErrorCode>(i)) == s) return static_cast<ErrorCode>(i);
  bad("unknown error code '" + std::string(s) + "'");
}

TxStatus parse_status(std::string_view s) {
  for (auto st : {TxStatus::Success, TxStatus::Reverted, TxStatus::Dropped})
    if (to_string(st) == s) return st;
  bad("unknown status '" + std::string(s) + "'");
}

}  // namespace

const std::string* Fields::find(std::string_view key) const noexcept {
  for (const auto& [k, v] : kv_)
    if (k == key) return &v;
  return nullptr;
}

const std::string& Fields::at(std::string_view key) const {
  if (const auto* v = find(key)) return *v;
  bad("missing field '" + std::string(key) + "'");
}

std::string Fields::str() const {
  if (kv_.empty()) return "-";
  std::string out;
  for (const auto& [k, v] : kv_) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

Fields Fields::parse(std::string_view text) {
  Fields f;
  if (text == "-") return f;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(start, end - start);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) bad("bad field '" + std::string(item) + "'");
    f.add(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    start = end + 1;
  }
  return f;
}

std::string LogRecord::str() const {
  std::string out = std::to_string(round);
  out += '\t';
  out += std::to_string(tick);
  out += '\t';
  out += type;
  out += '\t';
  out += actor ? std::to_string(actor->value) : "-";
  out += '\t';
  out += ids.str();
  out += '\t';
  out += amounts.str();
  out += '\t';
  out += detail.str();
  return out;
}

LogRecord LogRecord::parse(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (cols.size() != 7) bad("expected 7 columns, got " + std::to_string(cols.size()));
  LogRecord r;
  r.round = to_u64(cols[0], "round");
  r.tick = to_u64(cols[1], "tick");
  r.type = std::string(cols[2]);
  if (r.type.empty()) bad("empty record type");
  if (cols[3] != "-") r.actor = AgentId{to_u32(cols[3], "actor")};
  r.ids = Fields::parse(cols[4]);
  r.amounts = Fields::parse(cols[5]);
  r.detail = Fields::parse(cols[6]);
  return r;
}

void EventLog::write(std::ostream& out) const {
  out << kLogHeader << '\n';
  for (const auto& r : records_) out << r.str() << '\n';
}

EventLog EventLog::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) bad("missing header line");
  EventLog log;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      log.append(LogRecord::parse(line));
    } catch (const SimError& e) {
      bad("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return log;
}

LogRecord tx_record(std::uint64_t round, std::uint64_t height, const Transaction& tx, const Receipt& receipt) {
  LogRecord r;
  r.round = round;
  r.type = "TX";
  r.actor = tx.sender();
  r.ids.add("tx", tx.id().value).add("height", height);
  r.detail.add("kind", std::string(to_string(tx.kind())));
  if (const auto& s = tx.swap_intent()) {
    r.ids.add("pool", s->pool.value);
    r.detail.add("dir", std::string(to_string(s->direction)));
    r.amounts.add("in", s->amount_in).add("min", s->min_out);
  }
  if (const auto& t = tx.transfer_intent()) {
    r.ids.add("to", t->to.value);
    r.detail.add("asset", std::string(to_string(t->asset)));
    r.amounts.add("in", t->amount);
  }
  r.amounts.add("gas_price", tx.gas_price()).add("out", receipt.amount_out).add("paid", receipt.gas_paid);
  r.detail.add("gas_used", tx.gas_used())
      .add("origin", tx.origin_round())
      .add("status", std::string(to_string(receipt.status)))
      .add("error", receipt.error ? std::string(to_string(*receipt.error)) : std::string("-"));
  return r;
}

Transaction tx_from_record(const LogRecord& r) {
  if (r.type != "TX" || !r.actor) bad("not a TX record");
  return wrap(
      [&] {
        const TxKind kind = parse_tx_kind(r.detail.at("kind"));
        std::optional<SwapIntent> swap;
        std::optional<TransferIntent> transfer;
        if (kind == TxKind::Swap)
          swap.emplace(PoolId{to_u32(r.ids.at("pool"), "pool")}, parse_direction(r.detail.at("dir")),
                       to_amount(r.amounts.at("in")), to_amount(r.amounts.at("min")));
        if (kind == TxKind::Transfer)
          transfer.emplace(AgentId{to_u32(r.ids.at("to"), "to")}, parse_asset(r.detail.at("asset")),
                           to_amount(r.amounts.at("in")));
        return Transaction::restore(TxId{to_u64(r.ids.at("tx"), "tx")}, *r.actor, kind, swap, transfer,
                                    to_amount(r.amounts.at("gas_price")), to_u64(r.detail.at("gas_used"), "gas_used"),
                                    to_u64(r.detail.at("origin"), "origin"));
      },
      "TX record");
}

Receipt receipt_from_record(const LogRecord& r) {
  Receipt rc;
  rc.tx = TxId{to_u64(r.ids.at("tx"), "tx")};
  rc.status = parse_status(r.detail.at("status"));
  rc.amount_out = to_amount(r.amounts.at("out"));
  rc.gas_paid = to_amount(r.amounts.at("paid"));
  rc.error = parse_error(r.detail.at("error"));
  return rc;
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayResult replay_log(const EventLog& log) {
  ReplayResult out;
  ChainState state;
  bool final_seen = false;
  const auto& recs = log.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const LogRecord& r = recs[i];
    if (r.type == "GENESIS_POOL") {
      wrap(
          [&] {
            state.add_pool(Pool(PoolId{to_u32(r.ids.at("pool"), "pool")}, to_amount(r.amounts.at("x")),
                                to_amount(r.amounts.at("y")), to_u32(r.detail.at("fee_bps"), "fee_bps")));
            return 0;
          },
          "GENESIS_POOL");
    } else if (r.type == "GENESIS_BALANCE") {
      if (!r.actor) bad("GENESIS_BALANCE without actor");
      for (const auto& [asset, amount] : r.amounts.items())
        wrap(
            [&] {
              state.credit(*r.actor, parse_asset(asset), to_amount(amount));
              return 0;
            },
            "GENESIS_BALANCE");
    } else if (r.type == "BLOCK") {
      if (!r.actor) bad("BLOCK without builder");
      const std::uint64_t height = to_u64(r.ids.at("height"), "height");
      const std::size_t ntx = to_u64(r.detail.at("txs"), "txs");
      const std::size_t nspan = to_u64(r.detail.at("spans"), "spans");
      if (i + ntx + nspan >= recs.size()) bad("block " + std::to_string(height) + " is truncated");
      Block block(height, *r.actor, to_u64(r.detail.at("gas_limit"), "gas_limit"));
      block.set_proposer(AgentId{to_u32(r.ids.at("proposer"), "proposer")});
      block.set_bid(to_amount(r.amounts.at("bid")));
      std::vector<Transaction> payload;
      std::vector<Receipt> logged;
      std::vector<BundleSpan> spans;
      for (std::size_t k = 0; k < ntx; ++k) {
        const LogRecord& t = recs[++i];
        if (t.type != "TX") bad("block " + std::to_string(height) + " expects TX records");
        payload.push_back(tx_from_record(t));
        logged.push_back(receipt_from_record(t));
      }
      for (std::size_t k = 0; k < nspan; ++k) {
        const LogRecord& s = recs[++i];
        if (s.type != "SPAN") bad("block " + std::to_string(height) + " expects SPAN records");
        spans.push_back(BundleSpan{to_u64(s.detail.at("first"), "first"), to_u64(s.detail.at("count"), "count")});
      }
      block.reset_payload(std::move(payload), std::move(spans));
      if (height != state.height() + 1) bad("block height " + std::to_string(height) + " out of sequence");
      auto [next, receipts] = wrap([&] { return execute_block(state, block); }, "block execution");
      for (std::size_t k = 0; k < receipts.size(); ++k) out.receipt_mismatches += receipts[k] != logged[k];
      state = std::move(next);
      ++out.blocks;
    } else if (r.type == "PENALTY") {
      if (!r.actor) bad("PENALTY without member");
      auto [next, taken] = collect_penalty(state, *r.actor, AgentId{to_u32(r.ids.at("to"), "to")}, kGasAsset,
                                           to_amount(r.amounts.at("assessed")));
      if (taken != to_amount(r.amounts.at("taken"))) ++out.receipt_mismatches;
      state = std::move(next);
      ++out.penalties;
    } else if (r.type == "FINAL") {
      const std::string& h = r.detail.at("hash");
      if (h.size() != 18 || h.substr(0, 2) != "0x") bad("bad hash '" + h + "'");
      std::uint64_t v = 0;
      const auto [end, ec] = std::from_chars(h.data() + 2, h.data() + h.size(), v, 16);
      if (ec != std::errc{} || end != h.data() + h.size()) bad("bad hash '" + h + "'");
      out.logged_hash = v;
      final_seen = true;
    }
  }
  if (!final_seen) bad("no FINAL record");
  out.replayed_hash = state_hash(state);
  out.state = std::move(state);
  return out;
}

}  // namespace mevsim
