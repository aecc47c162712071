#include <stdexcept>

#include "init.hpp"
#include "molpool/layers.hpp"

namespace molpool {

Mlp::Mlp(long in, long out, int depth, std::mt19937_64& rng)
    : in_(in), out_(out) {
  if (depth < 1) throw std::invalid_argument("mlp: depth must be >= 1");
  long width = in;
  for (int d = 0; d < depth; ++d) {
    weights_.push_back(detail::init_weight(width, out, rng));
    biases_.push_back(detail::init_bias(width, out, rng));
    width = out;
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t d = 0; d < weights_.size(); ++d) {
    h = affine(h, weights_[d], biases_[d]);
    if (d + 1 < weights_.size()) h = relu(h);
  }
  return h;
}

void Mlp::collect(const std::string& prefix, NamedTensors& out) const {
  for (std::size_t d = 0; d < weights_.size(); ++d) {
    out.push_back({prefix + ".w" + std::to_string(d), weights_[d]});
    out.push_back({prefix + ".b" + std::to_string(d), biases_[d]});
  }
}

}  // namespace molpool
