#include "molpool/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "molpool/kernels.hpp"

namespace molpool {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, t_);
  const double bias2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad())
      throw std::runtime_error("adam: parameter " + std::to_string(i) +
                               " has no gradient");
    kernels::active().adam(p.values().data(), p.grad().data(), m_[i].data(),
                           v_[i].data(), p.values().size(), lr_, beta1_,
                           beta2_, eps_, bias1, bias2);
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace molpool
