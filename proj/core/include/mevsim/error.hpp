#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mevsim {

enum class ErrorCode {
  InvalidArgument,
  NegativeAmount,
  UnknownPool,
  UnknownAgent,
  InsufficientBalance,
  ZeroReserve,
  GasLimitExceeded,
  DuplicateTx,
  BundleContiguity,
  BundleAborted,
  UnknownNode,
  BuilderRejectsPrivateFlow,
  BudgetExceeded,
  NoProfitableSize,
  NoProfit,
  NothingToPropose,
  DuplicateReport,
  UnknownInclusion,
  BadShares,
  UnclassifiableEvent,
  ConfigError,
  LogFormat,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the simulator surfaces as a SimError.
class SimError : public std::runtime_error {
public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Scenario problems carry the dotted path of the offending field.
class ConfigError : public SimError {
public:
  ConfigError(std::string path, const std::string& what)
      : SimError(ErrorCode::ConfigError, path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace mevsim
