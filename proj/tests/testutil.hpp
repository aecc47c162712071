#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "molpool/tensor.hpp"

namespace molpool::testutil {

// Central finite differences against the analytic gradient of a scalar
// loss. `loss_fn` must rebuild the graph from scratch on every call. Returns
// the worst relative error over all checked entries.
inline double check_gradient(const std::function<Tensor()>& loss_fn,
                             Tensor& param, double step = 1e-5) {
  param.zero_grad();
  Tensor loss = loss_fn();
  backward(loss);
  std::vector<double> analytic = param.grad();

  double worst = 0.0;
  for (std::size_t i = 0; i < param.values().size(); ++i) {
    const double saved = param.values()[i];
    param.values()[i] = saved + step;
    const double up = loss_fn().item();
    param.values()[i] = saved - step;
    const double down = loss_fn().item();
    param.values()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng,
                                         double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace molpool::testutil
