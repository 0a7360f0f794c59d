#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace mevsim {

template <class Tag, class Rep>
struct StrongId {
  Rep value{};

  constexpr StrongId() = default;
  constexpr explicit StrongId(Rep v) noexcept : value(v) {}
  constexpr auto operator<=>(const StrongId&) const = default;
};

using AgentId = StrongId<struct AgentTag, std::uint32_t>;
using TxId = StrongId<struct TxTag, std::uint64_t>;
using PoolId = StrongId<struct PoolTag, std::uint32_t>;
using NodeId = StrongId<struct NodeTag, std::uint32_t>;

/// Agent 0 collects fees of transactions executed outside any block.
inline constexpr AgentId kCoinbase{0};

enum class Asset : std::uint8_t { X, Y };
/// XforY: pay X, receive Y. YforX: pay Y, receive X.
enum class Direction : std::uint8_t { XforY, YforX };

constexpr Asset input_asset(Direction d) noexcept { return d == Direction::XforY ? Asset::X : Asset::Y; }
constexpr Asset output_asset(Direction d) noexcept { return d == Direction::XforY ? Asset::Y : Asset::X; }
constexpr Direction reverse(Direction d) noexcept {
  return d == Direction::XforY ? Direction::YforX : Direction::XforY;
}

std::string_view to_string(Asset a) noexcept;
std::string_view to_string(Direction d) noexcept;
Asset parse_asset(std::string_view s);
Direction parse_direction(std::string_view s);

}  // namespace mevsim

template <class Tag, class Rep>
struct std::hash<mevsim::StrongId<Tag, Rep>> {
  std::size_t operator()(const mevsim::StrongId<Tag, Rep>& id) const noexcept { return std::hash<Rep>{}(id.value); }
};
