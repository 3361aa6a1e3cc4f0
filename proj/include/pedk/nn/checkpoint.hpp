#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "pedk/nn/network.hpp"

namespace pedk::nn {

inline constexpr char kCheckpointMagic[4] = {'P', 'E', 'D', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

// Layout: "PEDK", u16 version, u32 descriptor length, descriptor as UTF-8
// JSON, then every parameter as a little-endian float32 in layer order.
void write_checkpoint(std::ostream& out, const Network<float>& network);
Network<float> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Network<float>& network);
Network<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace pedk::nn
