#pragma once

#include <cmath>
#include <random>

#include "molpool/tensor.hpp"

namespace molpool::detail {

// uniform fan-in scaling: bound = 1/sqrt(fan_in)
inline Tensor init_weight(long in, long out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w = Tensor::uniform({in, out}, -bound, bound, rng);
  w.set_param();
  return w;
}

inline Tensor init_bias(long in, long out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor b = Tensor::uniform({out}, -bound, bound, rng);
  b.set_param();
  return b;
}

}  // namespace molpool::detail
