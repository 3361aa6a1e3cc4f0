#include "pedk/nn/network.hpp"

#include <array>
#include <utility>

namespace pedk::nn {

namespace {
constexpr std::array<std::pair<LayerKind, const char*>, 6> kKindNames{{
    {LayerKind::conv, "conv"},
    {LayerKind::maxpool, "maxpool"},
    {LayerKind::relu, "relu"},
    {LayerKind::dense, "dense"},
    {LayerKind::dropout, "dropout"},
    {LayerKind::softmax, "softmax"},
}};
}  // namespace

std::string to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown layer kind '" + name + "'");
}

void to_json(nlohmann::json& j, const LayerSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case LayerKind::conv:
      j["filters"] = spec.filters;
      j["kernel"] = spec.kernel;
      j["stride"] = spec.stride;
      break;
    case LayerKind::dense:
      j["units"] = spec.units;
      break;
    case LayerKind::dropout:
      j["p"] = spec.dropout_p;
      break;
    default:
      break;
  }
}

void from_json(const nlohmann::json& j, LayerSpec& spec) {
  spec = LayerSpec{};
  spec.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  switch (spec.kind) {
    case LayerKind::conv:
      spec.filters = j.at("filters").get<Index>();
      spec.kernel = j.at("kernel").get<Index>();
      spec.stride = j.value("stride", Index{1});
      break;
    case LayerKind::dense:
      spec.units = j.at("units").get<Index>();
      break;
    case LayerKind::dropout:
      spec.dropout_p = j.at("p").get<double>();
      break;
    default:
      break;
  }
}

void to_json(nlohmann::json& j, const Architecture& arch) {
  j = nlohmann::json{{"M", arch.conv_blocks},   {"N", arch.dense_layers},  {"channels", arch.channels},
                     {"input_side", arch.input_side}, {"role", arch.role}, {"layers", arch.layers}};
}

void from_json(const nlohmann::json& j, Architecture& arch) {
  arch.conv_blocks = j.at("M").get<int>();
  arch.dense_layers = j.at("N").get<int>();
  arch.channels = j.at("channels").get<Index>();
  arch.input_side = j.at("input_side").get<Index>();
  arch.role = j.value("role", std::string{});
  arch.layers = j.at("layers").get<std::vector<LayerSpec>>();
}

std::vector<Shape> infer_shapes(const Architecture& arch) {
  if (arch.channels <= 0 || arch.input_side <= 0) {
    throw ShapeError("architecture input must have positive channels and side");
  }
  std::vector<Shape> shapes{arch.input_shape()};
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& layer = arch.layers[i];
    const Shape& in = shapes.back();
    Shape out = in;
    const auto fail = [&](const std::string& why) {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(layer.kind) + ") on input " + to_string(in) +
                       ": " + why);
    };
    switch (layer.kind) {
      case LayerKind::conv: {
        if (in.size() != 3) fail("conv needs a [C,H,W] input");
        if (layer.filters <= 0 || layer.kernel <= 0 || layer.stride <= 0) fail("invalid conv configuration");
        const Index h = conv_output_side(in[1], layer.kernel, layer.stride);
        const Index w = conv_output_side(in[2], layer.kernel, layer.stride);
        if (h < 1 || w < 1) fail("spatial size collapses below 1");
        out = {layer.filters, h, w};
        break;
      }
      case LayerKind::maxpool:
        if (in.size() != 3) fail("maxpool needs a [C,H,W] input");
        if (in[1] < 2 || in[2] < 2) fail("spatial size collapses below 1");
        out = {in[0], in[1] / 2, in[2] / 2};
        break;
      case LayerKind::dense:
        if (layer.units <= 0) fail("dense layer needs a positive width");
        out = {layer.units};
        break;
      case LayerKind::dropout:
        if (!(layer.dropout_p >= 0.0 && layer.dropout_p < 1.0)) fail("dropout probability must lie in [0,1)");
        break;
      case LayerKind::relu:
      case LayerKind::softmax:
        break;
    }
    shapes.push_back(std::move(out));
  }
  return shapes;
}

}  // namespace pedk::nn
