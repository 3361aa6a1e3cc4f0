#include <doctest.h>

#include <algorithm>
#include <set>

#include "pedk/ensemble.hpp"
#include "pedk/model_zoo.hpp"
#include "pedk/patching.hpp"
#include "support.hpp"

using namespace pedk;
using namespace pedk::zoo;
using patching::PatchGrid;
using patching::Rect;
using patching::WindowSpec;

TEST_SUITE("model_zoo") {
  TEST_CASE("architecture grid") {
    const auto grid = architecture_grid();
    REQUIRE(grid.size() == 5);
    const std::vector<std::string> labels{"3x3", "3x4", "4x3", "4x4", "5x5"};
    for (std::size_t i = 0; i < 5; ++i) CHECK(grid[i].label() == labels[i]);
    CHECK(in_grid({4, 3}));
    CHECK_FALSE(in_grid({5, 3}));
  }

  TEST_CASE("parse_arch") {
    CHECK(parse_arch("4x3") == ArchSpec{4, 3, Role::component});
    CHECK(parse_arch("5x5", Role::single).role == Role::single);
    CHECK_THROWS_AS(parse_arch("4"), ConfigError);
    CHECK_THROWS_AS(parse_arch("0x3"), ConfigError);
    CHECK_THROWS_AS(parse_arch("4x3x"), ConfigError);
  }

  TEST_CASE("networks at 200px are valid for every grid point") {
    for (const auto& arch : architecture_grid()) {
      const auto a = make_architecture(arch, 200);
      CHECK(nn::infer_shapes(a).back() == nn::Shape{2});
      CHECK(a.conv_blocks == arch.conv_blocks);
      CHECK(a.dense_layers == arch.dense_layers);
    }
    const auto single = build_single_network({4, 4}, 200, 1);
    CHECK(single.architecture().role == "single");
    CHECK(build_component_network({5, 5}, 200, 1).parameter_count() > 0);
  }

  TEST_CASE("layer recipe") {
    const auto a = make_architecture({4, 3}, 96);
    int convs = 0, pools = 0, dense = 0, dropouts = 0;
    std::vector<nn::Index> filters;
    for (const auto& l : a.layers) {
      convs += l.kind == nn::LayerKind::conv;
      pools += l.kind == nn::LayerKind::maxpool;
      dense += l.kind == nn::LayerKind::dense;
      dropouts += l.kind == nn::LayerKind::dropout;
      if (l.kind == nn::LayerKind::conv) {
        filters.push_back(l.filters);
        CHECK(l.kernel == 3);
        CHECK(l.stride == 1);
      }
    }
    CHECK(convs == 4);
    CHECK(pools == 4);
    CHECK(dense == 3);
    CHECK(dropouts == 1);
    CHECK(filters == std::vector<nn::Index>{32, 32, 64, 64});
    CHECK(a.layers.back().kind == nn::LayerKind::softmax);
    // Dropout sits right after the last hidden layer's ReLU.
    const auto n = a.layers.size();
    CHECK(a.layers[n - 2].kind == nn::LayerKind::dense);
    CHECK(a.layers[n - 3].kind == nn::LayerKind::dropout);
    CHECK(a.layers[n - 2].units == 2);
  }

  TEST_CASE("spatial collapse names the block") {
    try {
      make_architecture({7, 3}, 32);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("conv block") != std::string::npos);
    }
    CHECK(minimum_input_side(5) <= 96);
    CHECK_THROWS_AS(make_architecture({5, 5}, minimum_input_side(5) - 1), ShapeError);
    CHECK_NOTHROW(make_architecture({5, 5}, minimum_input_side(5)));
  }

  TEST_CASE("builders are deterministic") {
    const auto a = build_single_network({3, 3}, 64, 42);
    const auto b = build_single_network({3, 3}, 64, 42);
    const auto c = build_single_network({3, 3}, 64, 43);
    CHECK(a.parameters() == b.parameters());
    CHECK_FALSE(a.parameters() == c.parameters());
    CHECK(a.parameter_count() == b.parameter_count());
  }
}

namespace {

// Placements of a window of `side` along `extent`: multiples of `stride`
// that fit, plus the position flush with the far edge.
std::vector<nn::Index> brute_positions(nn::Index extent, nn::Index side, nn::Index stride) {
  if (side > extent) return {(extent - side) / 2};
  std::vector<nn::Index> out;
  for (nn::Index p = 0; p <= extent - side; ++p) {
    if (p % stride == 0 || p == extent - side) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_SUITE("patching") {
  TEST_CASE("400x400 with half windows and half steps gives 9 patches") {
    const auto grid = patching::patch_grid(400, 400, {0.5, 0.5});
    REQUIRE(grid.size() == 9);
    CHECK(grid.rects[0] == Rect{0, 0, 200, 200});
    CHECK(grid.rects[4] == Rect{100, 100, 200, 200});
    CHECK(grid.rects[8] == Rect{200, 200, 200, 200});
  }

  TEST_CASE("full window gives one patch") {
    for (nn::Index side : {16, 50, 97}) {
      const auto grid = patching::patch_grid(side, side, {1.0, 0.3});
      REQUIRE(grid.size() == 1);
      CHECK(grid.rects[0] == Rect{0, 0, side, side});
    }
  }

  TEST_CASE("64px with default-sized steps gives 81 patches") {
    const auto grid = patching::patch_grid(64, 64, {0.5, 0.125});
    CHECK(grid.size() == 81);
    CHECK(grid.rects[1].x == 4);
  }

  TEST_CASE("flush window covers the far edge") {
    const auto xs = patching::axis_positions(10, 4, 3);
    CHECK(xs == std::vector<nn::Index>{0, 3, 6});
    const auto ys = patching::axis_positions(11, 4, 3);
    CHECK(ys == std::vector<nn::Index>{0, 3, 6, 7});
    CHECK(patching::axis_positions(5, 9, 1) == std::vector<nn::Index>{-2});
  }

  TEST_CASE("grid matches brute force and covers the image") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const auto h = static_cast<nn::Index>(16 + rng.index(200));
      const auto w = static_cast<nn::Index>(16 + rng.index(200));
      WindowSpec spec{rng.uniform(0.5, 1.0), rng.uniform(0.01, 1.0), rng.bernoulli(0.3)};
      const auto grid = patching::patch_grid(h, w, spec);
      const auto shorter = std::min(h, w);
      const auto sy = spec.per_side ? patching::window_side(h, spec.window_ratio) : patching::window_side(shorter, spec.window_ratio);
      const auto sx = spec.per_side ? patching::window_side(w, spec.window_ratio) : sy;
      const auto ys = brute_positions(h, sy, patching::window_stride(sy, spec.step_ratio));
      const auto xs = brute_positions(w, sx, patching::window_stride(sx, spec.step_ratio));
      REQUIRE(grid.size() == ys.size() * xs.size());
      std::size_t i = 0;
      for (auto y : ys) {
        for (auto x : xs) CHECK(grid.rects[i++] == Rect{x, y, sx, sy});
      }
      const auto cover = ensemble::coverage(grid);
      CHECK(cover.minCoeff() >= 1);
    }
  }

  TEST_CASE("invalid window specs") {
    CHECK_THROWS_AS(patching::patch_grid(100, 100, {0.0, 0.5}), ConfigError);
    CHECK_THROWS_AS(patching::patch_grid(100, 100, {1.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(patching::patch_grid(100, 100, {0.5, 0.0}), ConfigError);
    CHECK_THROWS_AS(patching::patch_grid(12, 12, {0.5, 0.5}), ConfigError);
    CHECK_NOTHROW(patching::patch_grid(16, 16, {0.5, 0.5}));
  }

  TEST_CASE("extract_rescale identity and constants") {
    Rng rng(6);
    const auto image = test::random_tensor<float>({3, 20, 30}, rng, 0.0, 1.0);
    const Rect r{5, 3, 12, 12};
    const auto copy = patching::extract_rescale(image, r, 12);
    for (nn::Index c = 0; c < 3; ++c) {
      for (nn::Index y = 0; y < 12; ++y) {
        for (nn::Index x = 0; x < 12; ++x) CHECK(copy(c, y, x) == image(c, y + 3, x + 5));
      }
    }
    const auto flat = patching::extract_rescale(data::make_image(20, 20, 0.3f), {2, 2, 10, 10}, 17);
    CHECK((flat.data().array() == 0.3f).all());
  }

  TEST_CASE("extract_rescale interpolates a checkerboard") {
    const data::Image board({1, 2, 2}, {0.f, 1.f, 1.f, 0.f});
    const auto up = patching::extract_rescale(board, {0, 0, 2, 2}, 4);
    // Output centers map to source 0.25 and 0.75 on the inner samples.
    CHECK(up(0, 1, 1) == doctest::Approx(0.375));
    CHECK(up(0, 1, 2) == doctest::Approx(0.625));
    CHECK(up(0, 2, 1) == doctest::Approx(0.625));
    CHECK(up(0, 2, 2) == doctest::Approx(0.375));
    for (nn::Index i = 0; i < up.size(); ++i) {
      CHECK(up[i] >= 0.0f);
      CHECK(up[i] <= 1.0f);
    }
    CHECK(up(0, 0, 0) == 0.0f);
    CHECK(up(0, 0, 3) == 1.0f);
  }

  TEST_CASE("resize keeps values in range") {
    Rng rng(7);
    const auto image = test::random_tensor<float>({3, 33, 41}, rng, 0.0, 1.0);
    const auto small = patching::resize(image, 16, 20);
    CHECK(small.shape() == nn::Shape{3, 16, 20});
    CHECK(small.data().minCoeff() >= 0.0f);
    CHECK(small.data().maxCoeff() <= 1.0f);
  }
}
