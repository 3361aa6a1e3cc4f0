#pragma once

#include <array>
#include <string>

namespace pedk {

// The four component parts, in the fixed order used for aggregation.
enum class PartKind { barrel, magazine, receiver, stock };

inline constexpr std::array<PartKind, 4> kAllParts{PartKind::barrel, PartKind::magazine, PartKind::receiver,
                                                   PartKind::stock};

std::string to_string(PartKind part);
PartKind part_from_string(const std::string& name);

inline std::size_t part_index(PartKind part) { return static_cast<std::size_t>(part); }

}  // namespace pedk
