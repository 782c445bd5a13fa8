#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>

namespace crshare {

// Zero-based strongly typed index. Providers are numbered from 1 only in
// external reports.
template <typename Tag>
struct Id {
  using value_type = std::uint32_t;
  static constexpr value_type kInvalid = std::numeric_limits<value_type>::max();

  value_type value = kInvalid;

  constexpr Id() = default;
  constexpr explicit Id(value_type v) : value(v) {}
  constexpr explicit Id(std::size_t v) : value(static_cast<value_type>(v)) {}
  constexpr explicit Id(int v) : value(static_cast<value_type>(v)) {}

  constexpr bool valid() const { return value != kInvalid; }
  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(const Id&, const Id&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value; }
};

using ProviderId = Id<struct ProviderTag>;
using ChannelId = Id<struct ChannelTag>;
using CellId = Id<struct CellTag>;
using InfraId = Id<struct InfraTag>;
using NodeId = Id<struct NodeTag>;

using CallId = std::uint64_t;
using RequestId = std::uint64_t;

}  // namespace crshare

template <typename Tag>
struct std::hash<crshare::Id<Tag>> {
  std::size_t operator()(const crshare::Id<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
