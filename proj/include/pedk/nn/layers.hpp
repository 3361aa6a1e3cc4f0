#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pedk/nn/tensor.hpp"
#include "pedk/rng.hpp"

namespace pedk::nn {

enum class Mode { train, eval };

inline Index conv_output_side(Index side, Index kernel, Index stride) {
  if (side < kernel) return 0;
  return (side - kernel) / stride + 1;
}

// Unfolds every k x k receptive field of a [C,H,W] input into a column.
// Rows are ordered (c, ky, kx), columns (oy, ox).
template <typename Scalar>
MatrixX<Scalar> im2col(const Tensor<Scalar>& input, Index kernel, Index stride) {
  const Index channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const Index out_h = conv_output_side(height, kernel, stride);
  const Index out_w = conv_output_side(width, kernel, stride);
  MatrixX<Scalar> cols(channels * kernel * kernel, out_h * out_w);
  const Scalar* src = input.raw();
  for (Index c = 0; c < channels; ++c) {
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        Scalar* row = cols.row((c * kernel + ky) * kernel + kx).data();
        for (Index oy = 0; oy < out_h; ++oy) {
          const Scalar* line = src + (c * height + oy * stride + ky) * width + kx;
          Scalar* dst = row + oy * out_w;
          if (stride == 1) {
            std::copy(line, line + out_w, dst);
          } else {
            for (Index ox = 0; ox < out_w; ++ox) dst[ox] = line[ox * stride];
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatters column gradients back onto a [C,H,W] tensor.
template <typename Scalar>
void col2im_accumulate(const MatrixX<Scalar>& cols, Index kernel, Index stride, Tensor<Scalar>& out) {
  const Index channels = out.dim(0), height = out.dim(1), width = out.dim(2);
  const Index out_h = conv_output_side(height, kernel, stride);
  const Index out_w = conv_output_side(width, kernel, stride);
  Scalar* dst = out.raw();
  for (Index c = 0; c < channels; ++c) {
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        const Scalar* row = cols.row((c * kernel + ky) * kernel + kx).data();
        for (Index oy = 0; oy < out_h; ++oy) {
          Scalar* line = dst + (c * height + oy * stride + ky) * width + kx;
          const Scalar* src = row + oy * out_w;
          for (Index ox = 0; ox < out_w; ++ox) line[ox * stride] += src[ox];
        }
      }
    }
  }
}

inline void check_conv_shapes(const Shape& input, const Shape& weights, const Shape& bias, Index stride) {
  if (input.size() != 3 || weights.size() != 4 || bias.size() != 1) {
    throw ShapeError("conv expects input [C,H,W], weights [F,C,k,k], bias [F]; got input " + to_string(input) +
                     ", weights " + to_string(weights) + ", bias " + to_string(bias));
  }
  if (input[0] != weights[1]) {
    throw ShapeError("conv channel mismatch: input " + to_string(input) + " has " + std::to_string(input[0]) +
                     " channels but weights " + to_string(weights) + " expect " + std::to_string(weights[1]));
  }
  if (weights[2] != weights[3]) throw ShapeError("conv kernel must be square, got weights " + to_string(weights));
  if (bias[0] != weights[0]) {
    throw ShapeError("conv bias " + to_string(bias) + " does not match filter count of weights " + to_string(weights));
  }
  if (stride < 1) throw ShapeError("conv stride must be >= 1");
  if (input[1] < weights[2] || input[2] < weights[2]) {
    throw ShapeError("conv input " + to_string(input) + " is smaller than kernel of weights " + to_string(weights));
  }
}

// Valid (unpadded) convolution: [C,H,W] * [F,C,k,k] -> [F,H',W'], H' = (H-k)/stride + 1.
template <typename Scalar>
Tensor<Scalar> conv_forward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& bias,
                            Index stride, MatrixX<Scalar>* cols_out = nullptr) {
  check_conv_shapes(input.shape(), weights.shape(), bias.shape(), stride);
  const Index filters = weights.dim(0), kernel = weights.dim(2);
  const Index out_h = conv_output_side(input.dim(1), kernel, stride);
  const Index out_w = conv_output_side(input.dim(2), kernel, stride);
  MatrixX<Scalar> cols = im2col(input, kernel, stride);
  Tensor<Scalar> out({filters, out_h, out_w});
  auto out_mat = out.matrix(filters, out_h * out_w);
  out_mat.noalias() = weights.matrix(filters, cols.rows()) * cols;
  out_mat.colwise() += bias.data();
  if (cols_out) *cols_out = std::move(cols);
  return out;
}

// Accumulates dL/dW and dL/db; returns dL/dinput unless `need_input_grad` is false.
template <typename Scalar>
Tensor<Scalar> conv_backward(const Shape& input_shape, const MatrixX<Scalar>& cols, const Tensor<Scalar>& weights,
                             const Tensor<Scalar>& grad_out, Index stride, Tensor<Scalar>& grad_weights,
                             Tensor<Scalar>& grad_bias, bool need_input_grad = true) {
  const Index filters = weights.dim(0), kernel = weights.dim(2);
  const Index spatial = grad_out.dim(1) * grad_out.dim(2);
  const auto g = grad_out.matrix(filters, spatial);
  grad_weights.matrix(filters, cols.rows()).noalias() += g * cols.transpose();
  grad_bias.data() += g.rowwise().sum();
  if (!need_input_grad) return {};
  MatrixX<Scalar> grad_cols = weights.matrix(filters, cols.rows()).transpose() * g;
  Tensor<Scalar> grad_in(input_shape);
  col2im_accumulate(grad_cols, kernel, stride, grad_in);
  return grad_in;
}

// Non-overlapping 2x2 max-pool with floor semantics. `argmax` receives the
// flat input index of each selected element; ties resolve to the first
// element in row-major order.
template <typename Scalar>
Tensor<Scalar> maxpool_forward(const Tensor<Scalar>& input, std::vector<Index>* argmax = nullptr) {
  if (input.rank() != 3 || input.dim(1) < 2 || input.dim(2) < 2) {
    throw ShapeError("maxpool needs [C,H,W] with H,W >= 2, got " + to_string(input.shape()));
  }
  const Index channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const Index out_h = height / 2, out_w = width / 2;
  Tensor<Scalar> out({channels, out_h, out_w});
  if (argmax) argmax->assign(static_cast<std::size_t>(out.size()), 0);
  const Scalar* src = input.raw();
  Index o = 0;
  for (Index c = 0; c < channels; ++c) {
    for (Index oy = 0; oy < out_h; ++oy) {
      for (Index ox = 0; ox < out_w; ++ox, ++o) {
        const Index base = (c * height + 2 * oy) * width + 2 * ox;
        const Index candidates[4] = {base, base + 1, base + width, base + width + 1};
        Index best = candidates[0];
        for (int i = 1; i < 4; ++i) {
          if (src[candidates[i]] > src[best]) best = candidates[i];
        }
        out[o] = src[best];
        if (argmax) (*argmax)[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> maxpool_backward(const Shape& input_shape, const std::vector<Index>& argmax,
                                const Tensor<Scalar>& grad_out) {
  Tensor<Scalar> grad_in(input_shape);
  for (Index o = 0; o < grad_out.size(); ++o) grad_in[argmax[static_cast<std::size_t>(o)]] += grad_out[o];
  return grad_in;
}

inline void check_dense_shapes(const Shape& input, const Shape& weights, const Shape& bias) {
  if (weights.size() != 2 || bias.size() != 1) {
    throw ShapeError("dense expects weights [m,d] and bias [m], got " + to_string(weights) + " and " +
                     to_string(bias));
  }
  if (element_count(input) != weights[1]) {
    throw ShapeError("dense dimension mismatch: input " + to_string(input) + " has " +
                     std::to_string(element_count(input)) + " features but weights " + to_string(weights) +
                     " expect " + std::to_string(weights[1]));
  }
  if (bias[0] != weights[0]) {
    throw ShapeError("dense bias " + to_string(bias) + " does not match weights " + to_string(weights));
  }
}

// Affine map W x + b; the input is flattened.
template <typename Scalar>
Tensor<Scalar> dense_forward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                             const Tensor<Scalar>& bias) {
  check_dense_shapes(input.shape(), weights.shape(), bias.shape());
  const Index m = weights.dim(0), d = weights.dim(1);
  VectorX<Scalar> y = bias.data();
  y.noalias() += weights.matrix(m, d) * input.data();
  return Tensor<Scalar>({m}, std::move(y));
}

template <typename Scalar>
Tensor<Scalar> dense_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                              const Tensor<Scalar>& grad_out, Tensor<Scalar>& grad_weights,
                              Tensor<Scalar>& grad_bias) {
  const Index m = weights.dim(0), d = weights.dim(1);
  grad_weights.matrix(m, d).noalias() += grad_out.data() * input.data().transpose();
  grad_bias.data() += grad_out.data();
  VectorX<Scalar> grad_in = weights.matrix(m, d).transpose() * grad_out.data();
  return Tensor<Scalar>(input.shape(), std::move(grad_in));
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input) {
  return Tensor<Scalar>(input.shape(), input.data().cwiseMax(Scalar(0)).eval());
}

template <typename Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& grad_out) {
  VectorX<Scalar> g = (grad_out.data().array() * (input.data().array() > Scalar(0)).template cast<Scalar>()).matrix();
  return Tensor<Scalar>(input.shape(), std::move(g));
}

// Max-subtracted softmax; safe for large logits.
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& logits) {
  const Scalar top = logits.data().maxCoeff();
  VectorX<Scalar> e = (logits.data().array() - top).exp().matrix();
  e /= e.sum();
  return Tensor<Scalar>(logits.shape(), std::move(e));
}

template <typename Scalar>
Tensor<Scalar> softmax_backward(const Tensor<Scalar>& probabilities, const Tensor<Scalar>& grad_out) {
  const Scalar dot = probabilities.data().dot(grad_out.data());
  VectorX<Scalar> g = probabilities.data().cwiseProduct((grad_out.data().array() - dot).matrix());
  return Tensor<Scalar>(probabilities.shape(), std::move(g));
}

// Inverted dropout. In train mode each element is zeroed with probability p
// and survivors are scaled by 1/(1-p); eval mode is the identity. `mask`
// receives the per-element multiplier.
template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& input, double p, Mode mode, Rng& rng, Tensor<Scalar>* mask = nullptr) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("dropout probability must lie in [0,1], got " + std::to_string(p));
  if (mode == Mode::eval || p == 0.0) {
    if (mask) *mask = Tensor<Scalar>(input.shape(), Scalar(1));
    return input;
  }
  if (p == 1.0) throw ConfigError("dropout probability 1 in train mode zeroes every activation");
  const Scalar keep_scale = Scalar(1.0 / (1.0 - p));
  Tensor<Scalar> m(input.shape());
  for (Index i = 0; i < m.size(); ++i) m[i] = rng.uniform() < p ? Scalar(0) : keep_scale;
  Tensor<Scalar> out(input.shape(), input.data().cwiseProduct(m.data()).eval());
  if (mask) *mask = std::move(m);
  return out;
}

template <typename Scalar>
Tensor<Scalar> dropout_backward(const Tensor<Scalar>& mask, const Tensor<Scalar>& grad_out) {
  return Tensor<Scalar>(grad_out.shape(), grad_out.data().cwiseProduct(mask.data()).eval());
}

inline constexpr double kProbabilityFloor = 1e-12;

template <typename Scalar>
struct CrossEntropy {
  Scalar loss;
  // Gradient of softmax + cross-entropy with respect to the logits: p - onehot.
  Tensor<Scalar> grad_logits;
};

// -log p[label], with p[label] clamped below by 1e-12.
template <typename Scalar>
CrossEntropy<Scalar> cross_entropy(const Tensor<Scalar>& probabilities, Index label) {
  if (label < 0 || label >= probabilities.size()) {
    throw ShapeError("label " + std::to_string(label) + " outside prediction of shape " +
                     to_string(probabilities.shape()));
  }
  const Scalar p = std::max(probabilities[label], Scalar(kProbabilityFloor));
  Tensor<Scalar> grad = probabilities;
  grad[label] -= Scalar(1);
  return {-std::log(p), std::move(grad)};
}

}  // namespace pedk::nn
