#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pedk/nn/network.hpp"

namespace pedk::nn {

// Gradients smaller than this in magnitude are compared on an absolute
// scale; below it central differences are dominated by round-off.
inline constexpr double kRelativeErrorFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

struct GradientCheckReport {
  double max_relative_error = 0.0;
  Index checked = 0;
  std::size_t worst_tensor = 0;
  Index worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = false;
};

// Compares `analytic` against central differences of `loss` obtained by
// perturbing every element of `params` by +-eps in place.
template <typename LossFn>
GradientCheckReport compare_gradients(std::vector<Tensor<double>>& params, const std::vector<Tensor<double>>& analytic,
                                      LossFn&& loss, double eps, double tolerance) {
  GradientCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t];
    for (Index i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = loss();
      p[i] = saved - eps;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[t][i], numeric);
      ++report.checked;
      if (err > report.max_relative_error || !std::isfinite(err)) {
        report.max_relative_error = std::isfinite(err) ? err : INFINITY;
        report.worst_tensor = t;
        report.worst_index = i;
        report.worst_analytic = analytic[t][i];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

// Softmax + cross-entropy loss of one sample, eval-mode (dropout off).
inline double sample_loss(const Network<double>& network, const Tensor<double>& input, Index label) {
  return cross_entropy(network.predict(input), label).loss;
}

inline std::vector<Tensor<double>> analytic_gradients(const Network<double>& network, const Tensor<double>& input,
                                                      Index label) {
  Tape<double> tape;
  Rng rng(0);
  network.forward(input, tape, Mode::eval, rng);
  auto grads = network.zero_gradients();
  network.backward(tape, cross_entropy(tape.probabilities, label).grad_logits, grads);
  return grads;
}

// Checks every parameter of `network` on one labelled sample.
inline GradientCheckReport gradient_check(Network<double>& network, const Tensor<double>& input, Index label,
                                          double eps = 1e-5, double tolerance = 1e-4) {
  const auto grads = analytic_gradients(network, input, label);
  return compare_gradients(network.parameters(), grads, [&] { return sample_loss(network, input, label); }, eps,
                           tolerance);
}

}  // namespace pedk::nn
