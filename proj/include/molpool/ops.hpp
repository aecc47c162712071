#pragma once

#include <vector>

#include "molpool/tensor.hpp"

namespace molpool {

// Elementwise; binary ops require identical shapes (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);

// a (m x k) . b (k x n)
Tensor matmul(const Tensor& a, const Tensor& b);

// x (n x in) . w (in x out) + row-broadcast bias (out)
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

// All inputs rank 2; shapes must agree off-axis. axis is 0 or 1.
Tensor concat(const std::vector<Tensor>& parts, int axis);

// out[r] = x[rows[r]]; backward scatter-adds into x.
Tensor row_gather(const Tensor& x, const std::vector<long>& rows);

// out[i] = x[i] * s[i]; s is (n x 1) or (n).
Tensor mul_rowwise(const Tensor& x, const Tensor& s);

enum class SegmentMode { Sum, Max };

// values (n x c), ids[i] in [0, num_segments). Empty segments produce zero
// rows under both modes; max backward routes grad to the first argmax row.
Tensor segment_reduce(const Tensor& values, const std::vector<int>& ids,
                      SegmentMode mode, long num_segments);

Tensor reduce_sum(const Tensor& x);  // shape {1}

struct BatchNormState {
  Tensor gamma, beta;  // learnable, shape {c}
  std::vector<double> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;
  bool training = true;

  explicit BatchNormState(long channels);
  long channels() const { return static_cast<long>(running_mean.size()); }
};

// x (n x c). Training mode normalizes with batch statistics (population
// variance) and updates running stats; inference uses running stats.
Tensor batchnorm(const Tensor& x, BatchNormState& state);

// Losses; target and mask are plain data (not differentiated through).
// Mean over mask-selected entries; errors when the mask selects nothing.
Tensor masked_mse(const Tensor& pred, const Tensor& target,
                  const Tensor& mask);
Tensor bce_with_logits(const Tensor& logits, const Tensor& target,
                       const Tensor& mask);

}  // namespace molpool
