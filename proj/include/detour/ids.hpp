#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace detour {

struct NodeId {
  std::int64_t value = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct SegmentId {
  std::int64_t value = 0;
  friend auto operator<=>(const SegmentId&, const SegmentId&) = default;
};

}  // namespace detour

template <>
struct std::hash<detour::NodeId> {
  std::size_t operator()(const detour::NodeId& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};

template <>
struct std::hash<detour::SegmentId> {
  std::size_t operator()(const detour::SegmentId& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
