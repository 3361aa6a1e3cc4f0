#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pedk/nn/network.hpp"
#include "pedk/parts.hpp"

namespace pedk::zoo {

using nn::Index;

enum class Role { component, single };

std::string to_string(Role role);

// M conv blocks followed by N dense layers.
struct ArchSpec {
  int conv_blocks = 4;
  int dense_layers = 4;
  Role role = Role::component;

  // "MxN", e.g. "4x3".
  std::string label() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Parses "MxN".
ArchSpec parse_arch(const std::string& text, Role role = Role::component);

// Layer recipe shared by both model families. A conv block is conv + ReLU +
// 2x2 max-pool; the first `narrow_blocks` blocks use `narrow_filters`, the
// rest `wide_filters`. N dense layers are N-1 hidden ReLU layers plus the
// 2-unit output; dropout follows the last hidden layer.
struct Recipe {
  Index channels = 3;
  Index kernel = 3;
  Index narrow_filters = 32;
  Index wide_filters = 64;
  int narrow_blocks = 2;
  Index hidden_units = 128;
  double dropout_p = 0.5;
};

// The five architectures searched over, in order:
// (3,3), (3,4), (4,3), (4,4), (5,5).
std::vector<ArchSpec> architecture_grid(Role role = Role::component);

bool in_grid(const ArchSpec& arch);

// Throws ShapeError naming the conv block whose output would have a spatial
// side below 1.
nn::Architecture make_architecture(const ArchSpec& arch, Index input_side, const Recipe& recipe = {});

// Smallest input side for which `conv_blocks` blocks stay valid.
Index minimum_input_side(int conv_blocks, const Recipe& recipe = {});

template <typename Scalar = float>
nn::Network<Scalar> build_network(const ArchSpec& arch, Index input_side, std::uint64_t seed,
                                  const Recipe& recipe = {}) {
  nn::Network<Scalar> network(make_architecture(arch, input_side, recipe));
  network.initialize(seed);
  return network;
}

template <typename Scalar = float>
nn::Network<Scalar> build_component_network(ArchSpec arch, Index input_side, std::uint64_t seed,
                                            const Recipe& recipe = {}) {
  arch.role = Role::component;
  return build_network<Scalar>(arch, input_side, seed, recipe);
}

template <typename Scalar = float>
nn::Network<Scalar> build_single_network(ArchSpec arch, Index input_side, std::uint64_t seed,
                                         const Recipe& recipe = {}) {
  arch.role = Role::single;
  return build_network<Scalar>(arch, input_side, seed, recipe);
}

}  // namespace pedk::zoo
