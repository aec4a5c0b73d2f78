#pragma once

#include <cmath>
#include <random>

#include "gesturekit/nn/layers.hpp"

namespace gk::nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  long probes = 0;
};

// Central-difference check of one layer against its backward pass. The scalar
// loss is a fixed random linear functional of the output, so dy equals the
// functional's weights. Checks the input gradient and every parameter
// gradient on up to probes_per_tensor coordinates each.
template <typename T>
GradCheckReport check_layer_gradients(Layer<T>& layer,
                                      const std::vector<int>& in_shape,
                                      std::mt19937_64& rng,
                                      int probes_per_tensor = 24,
                                      bool train = true) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Tensor<T> x(in_shape);
  for (auto& v : x.v) {
    v = static_cast<T>(uni(rng));
    // keep clear of the relu/maxpool kinks at the origin
    if (std::abs(static_cast<double>(v)) < 1e-3)
      v += v >= T(0) ? T(2e-3) : T(-2e-3);
  }
  layer.init_params(rng);
  for (auto* p : layer.parameters())
    for (auto& v : p->v) v += static_cast<T>(0.1 * uni(rng));

  Tensor<T> y0 = layer.forward(x, train);
  std::vector<T> w(y0.size());
  for (auto& v : w) v = static_cast<T>(uni(rng));

  auto loss = [&]() {
    Tensor<T> y = layer.forward(x, train);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      s += static_cast<double>(w[i]) * y.v[i];
    return s;
  };

  for (auto* p : layer.parameters()) {
    p->ensure_grad();
    p->zero_grad();
  }
  layer.forward(x, train);
  Tensor<T> dy(y0.shape);
  dy.v = w;
  Tensor<T> dx = layer.backward(dy);

  GradCheckReport report;
  const double h = 1e-6;
  auto probe = [&](std::vector<T>& values, const std::vector<T>& analytic) {
    const std::size_t n = values.size();
    std::vector<std::size_t> coords;
    if (static_cast<int>(n) <= probes_per_tensor) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (int i = 0; i < probes_per_tensor; ++i) coords.push_back(pick(rng));
    }
    for (std::size_t i : coords) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(h);
      const double lp = loss();
      values[i] = saved - static_cast<T>(h);
      const double lm = loss();
      values[i] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = static_cast<double>(analytic[i]);
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3});
      report.max_rel_err = std::max(report.max_rel_err, rel);
      ++report.probes;
    }
  };

  probe(x.v, dx.v);
  for (auto* p : layer.parameters()) probe(p->v, p->g);
  // restore caches consistent with the unperturbed input
  layer.forward(x, train);
  return report;
}

}  // namespace gk::nn
