#pragma once

#include <vector>

#include "pedk/data/image.hpp"

namespace pedk::patching {

using data::Image;
using nn::Index;

// Sliding-window geometry expressed relative to the image. The window side is
// window_ratio * min(height, width); the stride is step_ratio * window side.
// With `per_side` set, each axis uses its own side instead (non-square
// windows).
struct WindowSpec {
  double window_ratio = 0.5;
  double step_ratio = 0.125;
  bool per_side = false;
};

struct Rect {
  Index x = 0;
  Index y = 0;
  Index width = 0;
  Index height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Windows ordered row-major by (y, x).
struct PatchGrid {
  Index image_height = 0;
  Index image_width = 0;
  std::vector<Rect> rects;

  std::size_t size() const { return rects.size(); }
};

// Window origins along one axis: 0, stride, 2*stride, ... plus one window
// flush with the far edge when the regular ones leave it uncovered. A window
// longer than the axis yields one centered position.
std::vector<Index> axis_positions(Index extent, Index side, Index stride);

Index window_side(Index extent, double window_ratio);
Index window_stride(Index side, double step_ratio);

PatchGrid patch_grid(Index height, Index width, const WindowSpec& spec = {});

// Crops `rect` and resamples it bilinearly (pixel-center aligned, edges
// clamped to the rect) to target_side x target_side.
Image extract_rescale(const Image& image, const Rect& rect, Index target_side);

// Bilinear resize of a whole image.
Image resize(const Image& image, Index out_height, Index out_width);

}  // namespace pedk::patching
