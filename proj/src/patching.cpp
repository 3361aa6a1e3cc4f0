#include "pedk/patching.hpp"

#include <algorithm>
#include <cmath>

#include "pedk/error.hpp"

namespace pedk::patching {

namespace {

// Bilinear sample of channel c over the sub-rectangle [x0,x1] x [y0,y1].
inline float sample(const Image& image, Index c, double sy, double sx, Index y_lo, Index y_hi, Index x_lo, Index x_hi) {
  sy = std::clamp(sy, static_cast<double>(y_lo), static_cast<double>(y_hi));
  sx = std::clamp(sx, static_cast<double>(x_lo), static_cast<double>(x_hi));
  const auto y0 = static_cast<Index>(std::floor(sy));
  const auto x0 = static_cast<Index>(std::floor(sx));
  const Index y1 = std::min(y0 + 1, y_hi);
  const Index x1 = std::min(x0 + 1, x_hi);
  const double fy = sy - static_cast<double>(y0);
  const double fx = sx - static_cast<double>(x0);
  if (fy == 0.0 && fx == 0.0) return image(c, y0, x0);
  const double top = (1.0 - fx) * image(c, y0, x0) + fx * image(c, y0, x1);
  const double bottom = (1.0 - fx) * image(c, y1, x0) + fx * image(c, y1, x1);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

}  // namespace

std::vector<Index> axis_positions(Index extent, Index side, Index stride) {
  if (side > extent) return {(extent - side) / 2};
  std::vector<Index> positions;
  for (Index p = 0; p + side <= extent; p += stride) positions.push_back(p);
  if (positions.back() + side < extent) positions.push_back(extent - side);
  return positions;
}

Index window_side(Index extent, double window_ratio) {
  return std::max<Index>(1, std::lround(window_ratio * static_cast<double>(extent)));
}

Index window_stride(Index side, double step_ratio) {
  return std::max<Index>(1, std::lround(step_ratio * static_cast<double>(side)));
}

PatchGrid patch_grid(Index height, Index width, const WindowSpec& spec) {
  if (!(spec.window_ratio > 0.0 && spec.window_ratio <= 1.0)) {
    throw ConfigError("window ratio must lie in (0,1], got " + std::to_string(spec.window_ratio));
  }
  if (!(spec.step_ratio > 0.0 && spec.step_ratio <= 1.0)) {
    throw ConfigError("step ratio must lie in (0,1], got " + std::to_string(spec.step_ratio));
  }
  const Index shorter = std::min(height, width);
  if (static_cast<double>(shorter) * spec.window_ratio < 8.0) {
    throw ConfigError("window of " + std::to_string(spec.window_ratio) + " x " + std::to_string(shorter) +
                      "px is below the 8px minimum");
  }
  const Index side_y = spec.per_side ? window_side(height, spec.window_ratio) : window_side(shorter, spec.window_ratio);
  const Index side_x = spec.per_side ? window_side(width, spec.window_ratio) : side_y;
  const auto ys = axis_positions(height, side_y, window_stride(side_y, spec.step_ratio));
  const auto xs = axis_positions(width, side_x, window_stride(side_x, spec.step_ratio));
  PatchGrid grid{height, width, {}};
  grid.rects.reserve(ys.size() * xs.size());
  for (Index y : ys) {
    for (Index x : xs) grid.rects.push_back({x, y, side_x, side_y});
  }
  return grid;
}

Image extract_rescale(const Image& image, const Rect& rect, Index target_side) {
  const Index channels = image.dim(0);
  Image out({channels, target_side, target_side});
  const Index y_lo = std::max<Index>(rect.y, 0), y_hi = std::min(rect.y + rect.height, image.dim(1)) - 1;
  const Index x_lo = std::max<Index>(rect.x, 0), x_hi = std::min(rect.x + rect.width, image.dim(2)) - 1;
  const double scale_y = static_cast<double>(rect.height) / static_cast<double>(target_side);
  const double scale_x = static_cast<double>(rect.width) / static_cast<double>(target_side);
  for (Index c = 0; c < channels; ++c) {
    for (Index oy = 0; oy < target_side; ++oy) {
      const double sy = static_cast<double>(rect.y) + (static_cast<double>(oy) + 0.5) * scale_y - 0.5;
      for (Index ox = 0; ox < target_side; ++ox) {
        const double sx = static_cast<double>(rect.x) + (static_cast<double>(ox) + 0.5) * scale_x - 0.5;
        out(c, oy, ox) = sample(image, c, sy, sx, y_lo, y_hi, x_lo, x_hi);
      }
    }
  }
  return out;
}

Image resize(const Image& image, Index out_height, Index out_width) {
  const Index channels = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (out_height == h && out_width == w) return image;
  Image out({channels, out_height, out_width});
  const double scale_y = static_cast<double>(h) / static_cast<double>(out_height);
  const double scale_x = static_cast<double>(w) / static_cast<double>(out_width);
  for (Index c = 0; c < channels; ++c) {
    for (Index oy = 0; oy < out_height; ++oy) {
      const double sy = (static_cast<double>(oy) + 0.5) * scale_y - 0.5;
      for (Index ox = 0; ox < out_width; ++ox) {
        const double sx = (static_cast<double>(ox) + 0.5) * scale_x - 0.5;
        out(c, oy, ox) = sample(image, c, sy, sx, 0, h - 1, 0, w - 1);
      }
    }
  }
  return out;
}

}  // namespace pedk::patching
