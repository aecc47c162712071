#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace molpool {

namespace detail {

struct TensorNode {
  std::vector<long> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first touched
  // `leaf_param` marks tensors whose grads the optimizer consumes;
  // `tracked` marks any node participating in the backward graph.
  bool leaf_param = false;
  bool tracked = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backprop;

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

// Dense double-precision tensor (rank 1 or 2) with reverse-mode autodiff.
// Copying a Tensor copies the handle, not the storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(std::vector<double> values, std::vector<long> shape);
  static Tensor zeros(std::vector<long> shape);
  static Tensor full(std::vector<long> shape, double value);
  // uniform in [lo, hi)
  static Tensor uniform(std::vector<long> shape, double lo, double hi,
                        std::mt19937_64& rng);
  static Tensor scalar(double v) { return from({v}, {1}); }

  bool defined() const { return node_ != nullptr; }
  const std::vector<long>& shape() const { return node_->shape; }
  long rank() const { return static_cast<long>(node_->shape.size()); }
  long size() const { return static_cast<long>(node_->values.size()); }
  long rows() const { return node_->shape[0]; }
  long cols() const { return rank() == 2 ? node_->shape[1] : 1; }
  std::string shape_str() const;

  std::vector<double>& values() { return node_->values; }
  const std::vector<double>& values() const { return node_->values; }
  double value_at(long i) const { return node_->values[i]; }
  double item() const;  // requires size() == 1

  // Gradient slot; allocated (zeroed) on first access.
  std::vector<double>& grad();
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad();

  Tensor& set_param(bool on = true);
  bool is_param() const { return node_->leaf_param; }
  bool tracked() const { return node_->tracked; }

  // Same storage, new shape (element count must match).
  Tensor reshape(std::vector<long> shape) const;
  // Deep copy of values; detaches from the graph.
  Tensor clone_detached() const;

  std::shared_ptr<detail::TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::TensorNode> n)
      : node_(std::move(n)) {}

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

// Thread-local switch; ops built while disabled do not register backward
// closures (used for validation/inference passes).
bool grad_enabled();

struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Runs reverse-mode accumulation from a scalar loss. Grads accumulate
// across calls until zeroed.
void backward(const Tensor& loss);

}  // namespace molpool
