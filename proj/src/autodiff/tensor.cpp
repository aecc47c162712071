#include "molpool/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace molpool {

namespace {

long shape_product(const std::vector<long>& shape) {
  long n = 1;
  for (long d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  return n;
}

thread_local bool g_grad_enabled = true;

}  // namespace

Tensor Tensor::from(std::vector<double> values, std::vector<long> shape) {
  if (shape.empty() || shape.size() > 2)
    throw std::invalid_argument("tensor: rank must be 1 or 2");
  if (shape_product(shape) != static_cast<long>(values.size()))
    throw std::invalid_argument("tensor: value count does not match shape");
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::vector<long> shape) {
  long n = shape_product(shape);
  return from(std::vector<double>(static_cast<std::size_t>(n), 0.0),
              std::move(shape));
}

Tensor Tensor::full(std::vector<long> shape, double value) {
  long n = shape_product(shape);
  return from(std::vector<double>(static_cast<std::size_t>(n), value),
              std::move(shape));
}

Tensor Tensor::uniform(std::vector<long> shape, double lo, double hi,
                       std::mt19937_64& rng) {
  long n = shape_product(shape);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = dist(rng);
  return from(std::move(v), std::move(shape));
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < node_->shape.size(); ++i) {
    if (i) os << ", ";
    os << node_->shape[i];
  }
  os << ']';
  return os.str();
}

double Tensor::item() const {
  if (size() != 1)
    throw std::invalid_argument("tensor: item() requires a scalar, got " +
                                shape_str());
  return node_->values[0];
}

std::vector<double>& Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

Tensor& Tensor::set_param(bool on) {
  node_->leaf_param = on;
  node_->tracked = on;
  return *this;
}

Tensor Tensor::reshape(std::vector<long> shape) const {
  if (shape_product(shape) != size())
    throw std::invalid_argument("tensor: reshape element count mismatch");
  auto out = std::make_shared<detail::TensorNode>();
  out->shape = std::move(shape);
  out->values = node_->values;
  if (grad_enabled() && node_->tracked) {
    out->tracked = true;
    out->parents = {node_};
    auto parent = node_;
    detail::TensorNode* self = out.get();
    out->backprop = [parent, self] {
      parent->ensure_grad();
      for (std::size_t i = 0; i < self->grad.size(); ++i)
        parent->grad[i] += self->grad[i];
    };
  }
  return Tensor(std::move(out));
}

Tensor Tensor::clone_detached() const {
  auto out = std::make_shared<detail::TensorNode>();
  out->shape = node_->shape;
  out->values = node_->values;
  return Tensor(std::move(out));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument(
        "backward: loss must be a scalar tensor, got " +
        (loss.defined() ? loss.shape_str() : std::string("<empty>")));

  using detail::TensorNode;
  auto root = loss.node();

  // Iterative post-order DFS over parent edges; reversed emission order is
  // a topological order with every consumer ahead of its inputs.
  struct Frame {
    TensorNode* n;
    std::size_t next;
  };
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  seen.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      TensorNode* p = f.n->parents[f.next++].get();
      if (p->tracked && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backprop) n->backprop();
    if (n->leaf_param) n->ensure_grad();
  }
}

}  // namespace molpool
