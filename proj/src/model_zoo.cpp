#include "pedk/model_zoo.hpp"

#include <algorithm>

#include "pedk/error.hpp"

namespace pedk {

std::string to_string(PartKind part) {
  switch (part) {
    case PartKind::barrel:
      return "barrel";
    case PartKind::magazine:
      return "magazine";
    case PartKind::receiver:
      return "receiver";
    case PartKind::stock:
      return "stock";
  }
  return "unknown";
}

PartKind part_from_string(const std::string& name) {
  for (PartKind p : kAllParts) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown part '" + name + "' (expected barrel, magazine, receiver or stock)");
}

}  // namespace pedk

namespace pedk::zoo {

std::string to_string(Role role) { return role == Role::component ? "component" : "single"; }

std::string ArchSpec::label() const { return std::to_string(conv_blocks) + "x" + std::to_string(dense_layers); }

ArchSpec parse_arch(const std::string& text, Role role) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int m = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const int n = std::stoi(text.substr(x + 1), &used);
    if (used != text.size() - x - 1 || m < 1 || n < 1) throw std::invalid_argument(text);
    return {m, n, role};
  } catch (const std::exception&) {
    throw ConfigError("invalid architecture '" + text + "' (expected MxN with positive M and N)");
  }
}

std::vector<ArchSpec> architecture_grid(Role role) {
  return {{3, 3, role}, {3, 4, role}, {4, 3, role}, {4, 4, role}, {5, 5, role}};
}

bool in_grid(const ArchSpec& arch) {
  const auto grid = architecture_grid(arch.role);
  return std::find(grid.begin(), grid.end(), arch) != grid.end();
}

nn::Architecture make_architecture(const ArchSpec& arch, Index input_side, const Recipe& recipe) {
  if (arch.conv_blocks < 1 || arch.dense_layers < 1) {
    throw ConfigError("architecture " + arch.label() + " needs at least one conv block and one dense layer");
  }
  nn::Architecture out;
  out.channels = recipe.channels;
  out.input_side = input_side;
  out.conv_blocks = arch.conv_blocks;
  out.dense_layers = arch.dense_layers;
  out.role = to_string(arch.role);

  Index side = input_side;
  for (int b = 0; b < arch.conv_blocks; ++b) {
    const Index after_conv = side - recipe.kernel + 1;
    if (after_conv < 2) {
      throw ShapeError("architecture " + arch.label() + " on " + std::to_string(input_side) + "px input: conv block " +
                       std::to_string(b + 1) + " of " + std::to_string(arch.conv_blocks) + " receives side " +
                       std::to_string(side) + " and collapses below 1");
    }
    side = after_conv / 2;
    const Index filters = b < recipe.narrow_blocks ? recipe.narrow_filters : recipe.wide_filters;
    out.layers.push_back({.kind = nn::LayerKind::conv, .filters = filters, .kernel = recipe.kernel, .stride = 1});
    out.layers.push_back({.kind = nn::LayerKind::relu});
    out.layers.push_back({.kind = nn::LayerKind::maxpool});
  }
  for (int d = 0; d + 1 < arch.dense_layers; ++d) {
    out.layers.push_back({.kind = nn::LayerKind::dense, .units = recipe.hidden_units});
    out.layers.push_back({.kind = nn::LayerKind::relu});
    if (d + 2 == arch.dense_layers) out.layers.push_back({.kind = nn::LayerKind::dropout, .dropout_p = recipe.dropout_p});
  }
  out.layers.push_back({.kind = nn::LayerKind::dense, .units = 2});
  out.layers.push_back({.kind = nn::LayerKind::softmax});
  return out;
}

Index minimum_input_side(int conv_blocks, const Recipe& recipe) {
  Index side = 1;
  for (int b = 0; b < conv_blocks; ++b) side = 2 * side + recipe.kernel - 1;
  return side;
}

}  // namespace pedk::zoo
