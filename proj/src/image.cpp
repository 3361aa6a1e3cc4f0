#include "pedk/data/image.hpp"

#include <png.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pedk/error.hpp"

namespace pedk::data {

namespace {

unsigned char to_byte(float v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

struct ReadCursor {
  std::span<const unsigned char> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

Image quantize(const Image& image) {
  Image out = image;
  for (Index i = 0; i < out.size(); ++i) out[i] = static_cast<float>(to_byte(out[i])) / 255.0f;
  return out;
}

std::vector<unsigned char> encode_png(const Image& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw ShapeError("PNG export needs a [1|3,H,W] image, got " + nn::to_string(image.shape()));
  }
  const Index channels = image.dim(0), h = image.dim(1), w = image.dim(2);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialization failed");
  }
  std::vector<unsigned char> out;
  std::vector<unsigned char> rows(static_cast<std::size_t>(h * w * channels));
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      for (Index c = 0; c < channels; ++c) rows[static_cast<std::size_t>((y * w + x) * channels + c)] = to_byte(image(c, y, x));
    }
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (Index y = 0; y < h; ++y) png_write_row(png, rows.data() + y * w * channels);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw DataError("not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialization failed");
  }
  ReadCursor cursor{bytes, 0};
  std::vector<unsigned char> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("PNG decoding failed");
  }
  png_set_read_fn(png, &cursor, png_read_from_span);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  const auto w = static_cast<Index>(png_get_image_width(png, info));
  const auto h = static_cast<Index>(png_get_image_height(png, info));
  const auto channels = static_cast<Index>(png_get_channels(png, info));
  pixels.resize(static_cast<std::size_t>(w * h * channels));
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(h));
  for (Index y = 0; y < h; ++y) row_ptrs[static_cast<std::size_t>(y)] = pixels.data() + y * w * channels;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image image = make_image(h, w, 0.0f, channels == 1 ? 1 : 3);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      for (Index c = 0; c < image.dim(0); ++c) {
        image(c, y, x) = static_cast<float>(pixels[static_cast<std::size_t>((y * w + x) * channels + c)]) / 255.0f;
      }
    }
  }
  return image;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("file not found: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

void write_png(const std::filesystem::path& path, const Image& image) { write_bytes(path, encode_png(image)); }

Image read_png(const std::filesystem::path& path) { return decode_png(read_bytes(path)); }

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw DataError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace pedk::data
