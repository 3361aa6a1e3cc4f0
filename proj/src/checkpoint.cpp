#include "pedk/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace pedk::nn {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw DataError("checkpoint truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network<float>& network) {
  out.write(kCheckpointMagic, 4);
  put_le<std::uint16_t>(out, kCheckpointVersion);
  nlohmann::json descriptor = network.architecture();
  const std::string text = descriptor.dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : network.parameters()) {
    for (Index i = 0; i < p.size(); ++i) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(p[i]));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

Network<float> read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw DataError("not a checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = get_le<std::uint32_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw DataError("checkpoint truncated in descriptor");
  Architecture arch;
  try {
    arch = nlohmann::json::parse(text).get<Architecture>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid checkpoint descriptor: ") + e.what());
  }
  Network<float> network(std::move(arch));
  for (auto& p : network.parameters()) {
    for (Index i = 0; i < p.size(); ++i) p[i] = std::bit_cast<float>(get_le<std::uint32_t>(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint parameters");
  return network;
}

void save_checkpoint(const std::filesystem::path& path, const Network<float>& network) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, network);
}

Network<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("checkpoint not found: " + path.string());
  return read_checkpoint(in);
}

}  // namespace pedk::nn
