#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedk/nn/layers.hpp"

namespace pedk::nn {

enum class LayerKind { conv, maxpool, relu, dense, dropout, softmax };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  Index filters = 0;  // conv
  Index kernel = 0;   // conv
  Index stride = 1;   // conv
  Index units = 0;    // dense
  double dropout_p = 0.5;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Everything needed to rebuild a network's layer stack. `conv_blocks` and
// `dense_layers` are the M and N counts of the model family.
struct Architecture {
  Index channels = 3;
  Index input_side = 0;
  int conv_blocks = 0;
  int dense_layers = 0;
  std::string role;
  std::vector<LayerSpec> layers;

  Shape input_shape() const { return {channels, input_side, input_side}; }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

void to_json(nlohmann::json& j, const LayerSpec& spec);
void from_json(const nlohmann::json& j, LayerSpec& spec);
void to_json(nlohmann::json& j, const Architecture& arch);
void from_json(const nlohmann::json& j, Architecture& arch);

// Shapes flowing between layers: element i is the input of layer i, the last
// element is the network output. Throws ShapeError naming the first layer
// whose output would be empty.
std::vector<Shape> infer_shapes(const Architecture& arch);

// Per-sample activations kept by a training forward pass.
template <typename Scalar>
struct Tape {
  std::vector<Tensor<Scalar>> inputs;
  std::vector<MatrixX<Scalar>> cols;
  std::vector<std::vector<Index>> argmax;
  std::vector<Tensor<Scalar>> masks;
  Tensor<Scalar> probabilities;
};

// Sequential two-class classifier whose final layer is a softmax.
// Parameters are stored flat in layer order: weights then bias for every conv
// and dense layer. Const member functions never mutate state, so a trained
// network can be shared across threads for inference.
template <typename Scalar>
class Network {
 public:
  using Params = std::vector<Tensor<Scalar>>;

  explicit Network(Architecture arch) : arch_(std::move(arch)), shapes_(infer_shapes(arch_)) {
    if (arch_.layers.empty() || arch_.layers.back().kind != LayerKind::softmax) {
      throw ShapeError("network must end with a softmax layer");
    }
    if (shapes_.back() != Shape{2}) {
      throw ShapeError("network output must be 2 classes, got " + to_string(shapes_.back()));
    }
    param_offset_.assign(arch_.layers.size(), -1);
    for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
      const auto& layer = arch_.layers[i];
      const auto& in = shapes_[i];
      if (layer.kind == LayerKind::conv) {
        param_offset_[i] = static_cast<int>(params_.size());
        params_.emplace_back(Shape{layer.filters, in[0], layer.kernel, layer.kernel});
        params_.emplace_back(Shape{layer.filters});
      } else if (layer.kind == LayerKind::dense) {
        param_offset_[i] = static_cast<int>(params_.size());
        params_.emplace_back(Shape{layer.units, element_count(in)});
        params_.emplace_back(Shape{layer.units});
      }
    }
  }

  const Architecture& architecture() const { return arch_; }
  const std::vector<Shape>& shapes() const { return shapes_; }

  Params& parameters() { return params_; }
  const Params& parameters() const { return params_; }

  Params zero_gradients() const {
    Params grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) grads.emplace_back(p.shape());
    return grads;
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
  }

  // Uniform He initialization, U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases zero.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < params_.size(); i += 2) {
      auto& w = params_[i];
      const Index fan_in = w.size() / w.dim(0);
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (Index k = 0; k < w.size(); ++k) w[k] = static_cast<Scalar>(rng.uniform(-limit, limit));
      params_[i + 1].set_zero();
    }
  }

  // Eval-mode pass up to (excluding) the softmax.
  Tensor<Scalar> logits(const Tensor<Scalar>& input) const {
    check_input(input);
    Tensor<Scalar> x = input;
    for (std::size_t i = 0; i + 1 < arch_.layers.size(); ++i) {
      const auto& layer = arch_.layers[i];
      switch (layer.kind) {
        case LayerKind::conv:
          x = conv_forward(x, weight(i), bias(i), layer.stride);
          break;
        case LayerKind::maxpool:
          x = maxpool_forward(x);
          break;
        case LayerKind::relu:
          x = relu(x);
          break;
        case LayerKind::dense:
          x = dense_forward(x, weight(i), bias(i));
          break;
        case LayerKind::dropout:
        case LayerKind::softmax:
          break;
      }
    }
    return x;
  }

  Tensor<Scalar> predict(const Tensor<Scalar>& input) const { return softmax(logits(input)); }

  // Class index: 1 = positive, 0 = negative.
  Index classify(const Tensor<Scalar>& input) const {
    const auto z = logits(input);
    return z[1] > z[0] ? 1 : 0;
  }

  // Training pass recording what backward() needs. Returns the logits; the
  // softmax output is stored on the tape.
  Tensor<Scalar> forward(const Tensor<Scalar>& input, Tape<Scalar>& tape, Mode mode, Rng& rng) const {
    check_input(input);
    const std::size_t n = arch_.layers.size();
    tape.inputs.resize(n);
    tape.cols.resize(n);
    tape.argmax.resize(n);
    tape.masks.resize(n);
    Tensor<Scalar> x = input;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto& layer = arch_.layers[i];
      tape.inputs[i] = std::move(x);
      const auto& in = tape.inputs[i];
      switch (layer.kind) {
        case LayerKind::conv:
          x = conv_forward(in, weight(i), bias(i), layer.stride, &tape.cols[i]);
          break;
        case LayerKind::maxpool:
          x = maxpool_forward(in, &tape.argmax[i]);
          break;
        case LayerKind::relu:
          x = relu(in);
          break;
        case LayerKind::dense:
          x = dense_forward(in, weight(i), bias(i));
          break;
        case LayerKind::dropout:
          x = dropout(in, layer.dropout_p, mode, rng, &tape.masks[i]);
          break;
        case LayerKind::softmax:
          break;
      }
    }
    tape.probabilities = softmax(x);
    tape.inputs[n - 1] = x;
    return x;
  }

  // Accumulates parameter gradients given dL/dlogits.
  void backward(const Tape<Scalar>& tape, const Tensor<Scalar>& grad_logits, Params& grads) const {
    Tensor<Scalar> g = grad_logits;
    for (std::size_t i = arch_.layers.size() - 1; i-- > 0;) {
      const auto& layer = arch_.layers[i];
      const auto& in = tape.inputs[i];
      switch (layer.kind) {
        case LayerKind::conv: {
          const auto off = static_cast<std::size_t>(param_offset_[i]);
          g = conv_backward(in.shape(), tape.cols[i], weight(i), g, layer.stride, grads[off], grads[off + 1],
                            /*need_input_grad=*/i > 0);
          break;
        }
        case LayerKind::maxpool:
          g = maxpool_backward(in.shape(), tape.argmax[i], g);
          break;
        case LayerKind::relu:
          g = relu_backward(in, g);
          break;
        case LayerKind::dense: {
          const auto off = static_cast<std::size_t>(param_offset_[i]);
          g = dense_backward(in, weight(i), g, grads[off], grads[off + 1]);
          break;
        }
        case LayerKind::dropout:
          g = dropout_backward(tape.masks[i], g);
          break;
        case LayerKind::softmax:
          break;
      }
    }
  }

  template <typename Other>
  Network<Other> cast() const {
    Network<Other> out(arch_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i] = params_[i].template cast<Other>();
    return out;
  }

 private:
  void check_input(const Tensor<Scalar>& input) const {
    if (input.shape() != shapes_.front()) {
      throw ShapeError("network expects input " + to_string(shapes_.front()) + ", got " + to_string(input.shape()));
    }
  }
  const Tensor<Scalar>& weight(std::size_t layer) const {
    return params_[static_cast<std::size_t>(param_offset_[layer])];
  }
  const Tensor<Scalar>& bias(std::size_t layer) const {
    return params_[static_cast<std::size_t>(param_offset_[layer]) + 1];
  }

  Architecture arch_;
  std::vector<Shape> shapes_;
  std::vector<int> param_offset_;
  Params params_;
};

// SGD with classical momentum: v <- mu v - eta g; w <- w + v.
template <typename Scalar>
class Sgd {
 public:
  Sgd(double learning_rate, double momentum) : learning_rate_(learning_rate), momentum_(momentum) {}

  // Throws DivergenceError, leaving the parameters untouched, if any gradient
  // is non-finite.
  void step(typename Network<Scalar>::Params& params, const typename Network<Scalar>::Params& grads) {
    for (const auto& g : grads) {
      if (!g.all_finite()) throw DivergenceError("non-finite gradient; aborting epoch");
    }
    if (velocity_.empty()) {
      for (const auto& p : params) velocity_.emplace_back(p.shape());
    }
    const auto lr = static_cast<Scalar>(learning_rate_);
    const auto mu = static_cast<Scalar>(momentum_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& v = velocity_[i].data();
      v = mu * v - lr * grads[i].data();
      params[i].data() += v;
    }
  }

  void step(Network<Scalar>& network, const typename Network<Scalar>::Params& grads) {
    step(network.parameters(), grads);
  }

 private:
  double learning_rate_;
  double momentum_;
  typename Network<Scalar>::Params velocity_;
};

}  // namespace pedk::nn
