#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pedk/nn/tensor.hpp"

namespace pedk::data {

using nn::Index;

// [C,H,W] with values in [0,1]; C is 1 (gray) or 3 (RGB).
using Image = nn::Tensor<float>;

inline Image make_image(Index height, Index width, float fill = 0.0f, Index channels = 3) {
  return Image({channels, height, width}, fill);
}

inline Index height(const Image& image) { return image.dim(1); }
inline Index width(const Image& image) { return image.dim(2); }

// Snaps every value to the nearest of the 256 levels an 8-bit PNG can hold.
Image quantize(const Image& image);

std::vector<unsigned char> encode_png(const Image& image);
Image decode_png(std::span<const unsigned char> bytes);

void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

std::string sha256_hex(std::span<const unsigned char> bytes);

}  // namespace pedk::data
