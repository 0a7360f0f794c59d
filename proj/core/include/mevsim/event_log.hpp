#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mevsim/model.hpp"

namespace mevsim {

/// Ordered key=value list; rendered as k=v;k=v or "-" when empty.
class Fields {
public:
  Fields() = default;
  Fields(std::initializer_list<std::pair<std::string, std::string>> kv) : kv_(kv) {}

  Fields& add(std::string key, std::string value) {
    kv_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Fields& add(std::string key, std::uint64_t v) { return add(std::move(key), std::to_string(v)); }
  Fields& add(std::string key, TokenAmount a) { return add(std::move(key), a.str()); }
  Fields& add(std::string key, SignedAmount a) { return add(std::move(key), a.str()); }

  /// Throws LogFormat when missing.
  const std::string& at(std::string_view key) const;
  const std::string* find(std::string_view key) const noexcept;
  const std::vector<std::pair<std::string, std::string>>& items() const noexcept { return kv_; }

  std::string str() const;
  static Fields parse(std::string_view text);
  bool operator==(const Fields&) const = default;

private:
  std::vector<std::pair<std::string, std::string>> kv_;
};

/// One line of events.log. Columns:
///   round  tick  type  actor  ids  amounts  detail
/// `actor` is an agent id or "-"; the last three columns are Fields.
struct LogRecord {
  std::uint64_t round = 0;
  std::uint64_t tick = 0;
  std::string type;
  std::optional<AgentId> actor;
  Fields ids;
  Fields amounts;
  Fields detail;

  std::string str() const;
  static LogRecord parse(std::string_view line);
  bool operator==(const LogRecord&) const = default;
};

inline constexpr std::string_view kLogHeader = "round\ttick\ttype\tactor\tids\tamounts\tdetail";

class EventLog {
public:
  void append(LogRecord r) { records_.push_back(std::move(r)); }
  const std::vector<LogRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  void write(std::ostream& out) const;
  /// Throws LogFormat on a missing header or a malformed line.
  static EventLog read(std::istream& in);

private:
  std::vector<LogRecord> records_;
};

/// TX record carrying everything needed to rebuild the transaction and check its receipt.
LogRecord tx_record(std::uint64_t round, std::uint64_t height, const Transaction& tx, const Receipt& receipt);
Transaction tx_from_record(const LogRecord& r);
Receipt receipt_from_record(const LogRecord& r);

struct ReplayResult {
  std::uint64_t blocks = 0;
  std::uint64_t penalties = 0;
  std::uint64_t receipt_mismatches = 0;
  std::uint64_t logged_hash = 0;
  std::uint64_t replayed_hash = 0;
  ChainState state;
  bool ok() const noexcept { return receipt_mismatches == 0 && logged_hash == replayed_hash; }
};

/// Rebuilds genesis, re-executes every logged block and penalty, and compares
/// receipts and the FINAL state hash. Throws LogFormat on structural problems.
ReplayResult replay_log(const EventLog& log);

std::string hash_hex(std::uint64_t h);

}  // namespace mevsim
