#pragma once

#include <vector>

#include "molpool/tensor.hpp"

namespace molpool {

// Adam with bias correction. Gradients are left untouched by step();
// callers zero them between batches.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 1e-4,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();

  double lr() const { return lr_; }
  int t() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
};

}  // namespace molpool
