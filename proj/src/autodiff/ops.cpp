#include "molpool/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "molpool/kernels.hpp"

namespace molpool {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

NodePtr make_node(std::vector<long> shape, std::size_t count) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->values.resize(count);
  return n;
}

bool track(const Tensor& t) { return t.tracked(); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " +
                                t.shape_str());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  kernels::active().add(a.values().data(), b.values().data(),
                        out->values.data(), n);
  if (grad_enabled() && (track(a) || track(b))) {
    out->tracked = true;
    out->parents = {a.node(), b.node()};
    NodePtr an = a.node(), bn = b.node();
    TensorNode* self = out.get();
    out->backprop = [an, bn, self] {
      const std::size_t n = self->grad.size();
      if (an->tracked) {
        an->ensure_grad();
        kernels::active().axpy(1.0, self->grad.data(), an->grad.data(), n);
      }
      if (bn->tracked) {
        bn->ensure_grad();
        kernels::active().axpy(1.0, self->grad.data(), bn->grad.data(), n);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  kernels::active().sub(a.values().data(), b.values().data(),
                        out->values.data(), n);
  if (grad_enabled() && (track(a) || track(b))) {
    out->tracked = true;
    out->parents = {a.node(), b.node()};
    NodePtr an = a.node(), bn = b.node();
    TensorNode* self = out.get();
    out->backprop = [an, bn, self] {
      const std::size_t n = self->grad.size();
      if (an->tracked) {
        an->ensure_grad();
        kernels::active().axpy(1.0, self->grad.data(), an->grad.data(), n);
      }
      if (bn->tracked) {
        bn->ensure_grad();
        kernels::active().axpy(-1.0, self->grad.data(), bn->grad.data(), n);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  kernels::active().mul(a.values().data(), b.values().data(),
                        out->values.data(), n);
  if (grad_enabled() && (track(a) || track(b))) {
    out->tracked = true;
    out->parents = {a.node(), b.node()};
    NodePtr an = a.node(), bn = b.node();
    TensorNode* self = out.get();
    out->backprop = [an, bn, self] {
      const std::size_t n = self->grad.size();
      if (an->tracked) {
        an->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          an->grad[i] += self->grad[i] * bn->values[i];
      }
      if (bn->tracked) {
        bn->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          bn->grad[i] += self->grad[i] * an->values[i];
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor scale(const Tensor& a, double s) {
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  kernels::active().scale(a.values().data(), s, out->values.data(), n);
  if (grad_enabled() && track(a)) {
    out->tracked = true;
    out->parents = {a.node()};
    NodePtr an = a.node();
    TensorNode* self = out.get();
    out->backprop = [an, s, self] {
      an->ensure_grad();
      kernels::active().axpy(s, self->grad.data(), an->grad.data(),
                             self->grad.size());
    };
  }
  return Tensor(std::move(out));
}

Tensor relu(const Tensor& a) {
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  kernels::active().relu(a.values().data(), out->values.data(), n);
  if (grad_enabled() && track(a)) {
    out->tracked = true;
    out->parents = {a.node()};
    NodePtr an = a.node();
    TensorNode* self = out.get();
    out->backprop = [an, self] {
      an->ensure_grad();
      for (std::size_t i = 0; i < self->grad.size(); ++i)
        if (an->values[i] > 0.0) an->grad[i] += self->grad[i];
    };
  }
  return Tensor(std::move(out));
}

Tensor tanh(const Tensor& a) {
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  for (std::size_t i = 0; i < n; ++i) out->values[i] = std::tanh(a.values()[i]);
  if (grad_enabled() && track(a)) {
    out->tracked = true;
    out->parents = {a.node()};
    NodePtr an = a.node();
    TensorNode* self = out.get();
    out->backprop = [an, self] {
      an->ensure_grad();
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        const double y = self->values[i];
        an->grad[i] += self->grad[i] * (1.0 - y * y);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor sigmoid(const Tensor& a) {
  const std::size_t n = a.values().size();
  auto out = make_node(a.shape(), n);
  for (std::size_t i = 0; i < n; ++i)
    out->values[i] = 1.0 / (1.0 + std::exp(-a.values()[i]));
  if (grad_enabled() && track(a)) {
    out->tracked = true;
    out->parents = {a.node()};
    NodePtr an = a.node();
    TensorNode* self = out.get();
    out->backprop = [an, self] {
      an->ensure_grad();
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        const double y = self->values[i];
        an->grad[i] += self->grad[i] * y * (1.0 - y);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                a.shape_str() + " x " + b.shape_str());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  auto out = make_node({a.rows(), b.cols()}, m * n);
  kernels::active().matmul_nn(a.values().data(), b.values().data(),
                              out->values.data(), m, k, n, false);
  if (grad_enabled() && (track(a) || track(b))) {
    out->tracked = true;
    out->parents = {a.node(), b.node()};
    NodePtr an = a.node(), bn = b.node();
    TensorNode* self = out.get();
    out->backprop = [an, bn, self, m, k, n] {
      if (an->tracked) {
        an->ensure_grad();
        // dA += G . B^T
        kernels::active().matmul_nt(self->grad.data(), bn->values.data(),
                                    an->grad.data(), m, n, k, true);
      }
      if (bn->tracked) {
        bn->ensure_grad();
        // dB += A^T . G
        kernels::active().matmul_tn(an->values.data(), self->grad.data(),
                                    bn->grad.data(), m, k, n, true);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank2("affine", x);
  require_rank2("affine", w);
  if (x.cols() != w.rows())
    throw std::invalid_argument("affine: input width " + x.shape_str() +
                                " does not match weight " + w.shape_str());
  if (b.size() != w.cols())
    throw std::invalid_argument("affine: bias size " + b.shape_str() +
                                " does not match weight " + w.shape_str());
  const std::size_t m = x.rows(), k = x.cols(), n = w.cols();
  auto out = make_node({x.rows(), w.cols()}, m * n);
  kernels::active().matmul_nn(x.values().data(), w.values().data(),
                              out->values.data(), m, k, n, false);
  for (std::size_t i = 0; i < m; ++i)
    kernels::active().axpy(1.0, b.values().data(), out->values.data() + i * n,
                           n);
  if (grad_enabled() && (track(x) || track(w) || track(b))) {
    out->tracked = true;
    out->parents = {x.node(), w.node(), b.node()};
    NodePtr xn = x.node(), wn = w.node(), bn = b.node();
    TensorNode* self = out.get();
    out->backprop = [xn, wn, bn, self, m, k, n] {
      if (xn->tracked) {
        xn->ensure_grad();
        kernels::active().matmul_nt(self->grad.data(), wn->values.data(),
                                    xn->grad.data(), m, n, k, true);
      }
      if (wn->tracked) {
        wn->ensure_grad();
        kernels::active().matmul_tn(xn->values.data(), self->grad.data(),
                                    wn->grad.data(), m, k, n, true);
      }
      if (bn->tracked) {
        bn->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          kernels::active().axpy(1.0, self->grad.data() + i * n,
                                 bn->grad.data(), n);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1)
    throw std::invalid_argument("concat: axis out of range (must be 0 or 1)");
  for (const Tensor& t : parts) require_rank2("concat", t);

  long rows = parts[0].rows(), cols = parts[0].cols();
  if (axis == 0) {
    rows = 0;
    for (const Tensor& t : parts) {
      if (t.cols() != cols)
        throw std::invalid_argument("concat: column mismatch " +
                                    parts[0].shape_str() + " vs " +
                                    t.shape_str());
      rows += t.rows();
    }
  } else {
    cols = 0;
    for (const Tensor& t : parts) {
      if (t.rows() != rows)
        throw std::invalid_argument("concat: row mismatch " +
                                    parts[0].shape_str() + " vs " +
                                    t.shape_str());
      cols += t.cols();
    }
  }

  auto out = make_node({rows, cols}, static_cast<std::size_t>(rows * cols));
  if (axis == 0) {
    std::size_t offset = 0;
    for (const Tensor& t : parts) {
      std::copy(t.values().begin(), t.values().end(),
                out->values.begin() + offset);
      offset += t.values().size();
    }
  } else {
    std::size_t col_off = 0;
    for (const Tensor& t : parts) {
      const std::size_t tc = t.cols();
      for (long i = 0; i < rows; ++i)
        std::copy(t.values().begin() + i * tc, t.values().begin() + (i + 1) * tc,
                  out->values.begin() + i * cols + col_off);
      col_off += tc;
    }
  }

  bool any_tracked = false;
  for (const Tensor& t : parts) any_tracked |= track(t);
  if (grad_enabled() && any_tracked) {
    out->tracked = true;
    std::vector<NodePtr> ps;
    ps.reserve(parts.size());
    for (const Tensor& t : parts) ps.push_back(t.node());
    out->parents = ps;
    TensorNode* self = out.get();
    const long total_cols = cols;
    out->backprop = [ps, self, axis, total_cols] {
      if (axis == 0) {
        std::size_t offset = 0;
        for (const NodePtr& p : ps) {
          if (p->tracked) {
            p->ensure_grad();
            kernels::active().axpy(1.0, self->grad.data() + offset,
                                   p->grad.data(), p->values.size());
          }
          offset += p->values.size();
        }
      } else {
        std::size_t col_off = 0;
        for (const NodePtr& p : ps) {
          const std::size_t pc = p->shape[1];
          if (p->tracked) {
            p->ensure_grad();
            const long rows = p->shape[0];
            for (long i = 0; i < rows; ++i)
              kernels::active().axpy(
                  1.0, self->grad.data() + i * total_cols + col_off,
                  p->grad.data() + i * pc, pc);
          }
          col_off += pc;
        }
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor row_gather(const Tensor& x, const std::vector<long>& rows) {
  require_rank2("row_gather", x);
  const long c = x.cols();
  for (long r : rows)
    if (r < 0 || r >= x.rows())
      throw std::invalid_argument("row_gather: row index " +
                                  std::to_string(r) + " out of range for " +
                                  x.shape_str());
  auto out = make_node({static_cast<long>(rows.size()), c},
                       rows.size() * static_cast<std::size_t>(c));
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(x.values().begin() + rows[r] * c,
              x.values().begin() + (rows[r] + 1) * c,
              out->values.begin() + r * c);
  if (grad_enabled() && track(x)) {
    out->tracked = true;
    out->parents = {x.node()};
    NodePtr xn = x.node();
    TensorNode* self = out.get();
    auto idx = rows;
    out->backprop = [xn, self, idx, c] {
      xn->ensure_grad();
      for (std::size_t r = 0; r < idx.size(); ++r)
        kernels::active().axpy(1.0, self->grad.data() + r * c,
                               xn->grad.data() + idx[r] * c, c);
    };
  }
  return Tensor(std::move(out));
}

Tensor mul_rowwise(const Tensor& x, const Tensor& s) {
  require_rank2("mul_rowwise", x);
  if (s.size() != x.rows())
    throw std::invalid_argument("mul_rowwise: scale size " + s.shape_str() +
                                " does not match rows of " + x.shape_str());
  const long rows = x.rows(), c = x.cols();
  auto out = make_node(x.shape(), x.values().size());
  for (long i = 0; i < rows; ++i)
    kernels::active().scale(x.values().data() + i * c, s.values()[i],
                            out->values.data() + i * c, c);
  if (grad_enabled() && (track(x) || track(s))) {
    out->tracked = true;
    out->parents = {x.node(), s.node()};
    NodePtr xn = x.node(), sn = s.node();
    TensorNode* self = out.get();
    out->backprop = [xn, sn, self, rows, c] {
      if (xn->tracked) {
        xn->ensure_grad();
        for (long i = 0; i < rows; ++i)
          kernels::active().axpy(sn->values[i], self->grad.data() + i * c,
                                 xn->grad.data() + i * c, c);
      }
      if (sn->tracked) {
        sn->ensure_grad();
        for (long i = 0; i < rows; ++i)
          sn->grad[i] += kernels::active().dot(self->grad.data() + i * c,
                                               xn->values.data() + i * c, c);
      }
    };
  }
  return Tensor(std::move(out));
}

Tensor segment_reduce(const Tensor& values, const std::vector<int>& ids,
                      SegmentMode mode, long num_segments) {
  require_rank2("segment_reduce", values);
  if (static_cast<long>(ids.size()) != values.rows())
    throw std::invalid_argument(
        "segment_reduce: ids length " + std::to_string(ids.size()) +
        " does not match rows of " + values.shape_str());
  for (int id : ids)
    if (id < 0 || id >= num_segments)
      throw std::invalid_argument("segment_reduce: segment id " +
                                  std::to_string(id) + " out of range [0, " +
                                  std::to_string(num_segments) + ")");

  const long n = values.rows(), c = values.cols();
  auto out = make_node({num_segments, c},
                       static_cast<std::size_t>(num_segments * c));

  if (mode == SegmentMode::Sum) {
    std::fill(out->values.begin(), out->values.end(), 0.0);
    for (long i = 0; i < n; ++i)
      kernels::active().axpy(1.0, values.values().data() + i * c,
                             out->values.data() + ids[i] * c, c);
    if (grad_enabled() && track(values)) {
      out->tracked = true;
      out->parents = {values.node()};
      NodePtr vn = values.node();
      TensorNode* self = out.get();
      auto seg = ids;
      out->backprop = [vn, self, seg, c] {
        vn->ensure_grad();
        for (std::size_t i = 0; i < seg.size(); ++i)
          kernels::active().axpy(1.0, self->grad.data() + seg[i] * c,
                                 vn->grad.data() + i * c, c);
      };
    }
    return Tensor(std::move(out));
  }

  // Max: empty segments reduce to 0; ties route to the lowest row index.
  std::vector<long> argmax(static_cast<std::size_t>(num_segments * c), -1);
  for (long i = 0; i < n; ++i) {
    const double* row = values.values().data() + i * c;
    const long base = ids[i] * c;
    for (long ch = 0; ch < c; ++ch) {
      long& am = argmax[base + ch];
      if (am < 0 || row[ch] > out->values[base + ch]) {
        out->values[base + ch] = row[ch];
        am = i;
      }
    }
  }
  for (std::size_t j = 0; j < argmax.size(); ++j)
    if (argmax[j] < 0) out->values[j] = 0.0;

  if (grad_enabled() && track(values)) {
    out->tracked = true;
    out->parents = {values.node()};
    NodePtr vn = values.node();
    TensorNode* self = out.get();
    out->backprop = [vn, self, argmax, c] {
      vn->ensure_grad();
      const long segs = self->shape[0];
      for (long s = 0; s < segs; ++s)
        for (long ch = 0; ch < c; ++ch) {
          const long row = argmax[s * c + ch];
          if (row >= 0) vn->grad[row * c + ch] += self->grad[s * c + ch];
        }
    };
  }
  return Tensor(std::move(out));
}

Tensor reduce_sum(const Tensor& x) {
  auto out = make_node({1}, 1);
  out->values[0] = kernels::active().sum(x.values().data(), x.values().size());
  if (grad_enabled() && track(x)) {
    out->tracked = true;
    out->parents = {x.node()};
    NodePtr xn = x.node();
    TensorNode* self = out.get();
    out->backprop = [xn, self] {
      xn->ensure_grad();
      const double g = self->grad[0];
      for (double& gi : xn->grad) gi += g;
    };
  }
  return Tensor(std::move(out));
}

BatchNormState::BatchNormState(long channels)
    : gamma(Tensor::full({channels}, 1.0)),
      beta(Tensor::zeros({channels})),
      running_mean(static_cast<std::size_t>(channels), 0.0),
      running_var(static_cast<std::size_t>(channels), 1.0) {
  gamma.set_param();
  beta.set_param();
}

Tensor batchnorm(const Tensor& x, BatchNormState& state) {
  require_rank2("batchnorm", x);
  const long n = x.rows(), c = x.cols();
  if (c != state.channels())
    throw std::invalid_argument("batchnorm: input " + x.shape_str() +
                                " does not match state channels " +
                                std::to_string(state.channels()));
  if (state.training && n == 0)
    throw std::invalid_argument("batchnorm: zero rows in training mode");

  auto out = make_node(x.shape(), x.values().size());
  std::vector<double> xhat(x.values().size());
  std::vector<double> inv_std(static_cast<std::size_t>(c));

  if (state.training) {
    std::vector<double> mean(c, 0.0), var(c, 0.0);
    for (long i = 0; i < n; ++i) {
      const double* row = x.values().data() + i * c;
      for (long ch = 0; ch < c; ++ch) mean[ch] += row[ch];
    }
    for (long ch = 0; ch < c; ++ch) mean[ch] /= static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      const double* row = x.values().data() + i * c;
      for (long ch = 0; ch < c; ++ch) {
        const double d = row[ch] - mean[ch];
        var[ch] += d * d;
      }
    }
    for (long ch = 0; ch < c; ++ch) var[ch] /= static_cast<double>(n);
    for (long ch = 0; ch < c; ++ch)
      inv_std[ch] = 1.0 / std::sqrt(var[ch] + state.eps);
    for (long i = 0; i < n; ++i)
      for (long ch = 0; ch < c; ++ch) {
        const std::size_t idx = i * c + ch;
        xhat[idx] = (x.values()[idx] - mean[ch]) * inv_std[ch];
        out->values[idx] =
            state.gamma.values()[ch] * xhat[idx] + state.beta.values()[ch];
      }
    for (long ch = 0; ch < c; ++ch) {
      state.running_mean[ch] = (1.0 - state.momentum) * state.running_mean[ch] +
                               state.momentum * mean[ch];
      state.running_var[ch] = (1.0 - state.momentum) * state.running_var[ch] +
                              state.momentum * var[ch];
    }
  } else {
    for (long ch = 0; ch < c; ++ch)
      inv_std[ch] = 1.0 / std::sqrt(state.running_var[ch] + state.eps);
    for (long i = 0; i < n; ++i)
      for (long ch = 0; ch < c; ++ch) {
        const std::size_t idx = i * c + ch;
        xhat[idx] = (x.values()[idx] - state.running_mean[ch]) * inv_std[ch];
        out->values[idx] =
            state.gamma.values()[ch] * xhat[idx] + state.beta.values()[ch];
      }
  }

  if (grad_enabled() &&
      (track(x) || track(state.gamma) || track(state.beta))) {
    out->tracked = true;
    out->parents = {x.node(), state.gamma.node(), state.beta.node()};
    NodePtr xn = x.node(), gn = state.gamma.node(), bn = state.beta.node();
    TensorNode* self = out.get();
    const bool training = state.training;
    out->backprop = [xn, gn, bn, self, xhat, inv_std, n, c, training] {
      if (gn->tracked) {
        gn->ensure_grad();
        for (long i = 0; i < n; ++i)
          for (long ch = 0; ch < c; ++ch)
            gn->grad[ch] += self->grad[i * c + ch] * xhat[i * c + ch];
      }
      if (bn->tracked) {
        bn->ensure_grad();
        for (long i = 0; i < n; ++i)
          for (long ch = 0; ch < c; ++ch) bn->grad[ch] += self->grad[i * c + ch];
      }
      if (!xn->tracked) return;
      xn->ensure_grad();
      if (!training) {
        for (long i = 0; i < n; ++i)
          for (long ch = 0; ch < c; ++ch)
            xn->grad[i * c + ch] +=
                self->grad[i * c + ch] * gn->values[ch] * inv_std[ch];
        return;
      }
      // dL/dx through the batch statistics
      std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
      for (long i = 0; i < n; ++i)
        for (long ch = 0; ch < c; ++ch) {
          const double gy = self->grad[i * c + ch] * gn->values[ch];
          sum_g[ch] += gy;
          sum_gx[ch] += gy * xhat[i * c + ch];
        }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (long i = 0; i < n; ++i)
        for (long ch = 0; ch < c; ++ch) {
          const double gy = self->grad[i * c + ch] * gn->values[ch];
          xn->grad[i * c + ch] +=
              inv_std[ch] * (gy - inv_n * sum_g[ch] -
                             xhat[i * c + ch] * inv_n * sum_gx[ch]);
        }
    };
  }
  return Tensor(std::move(out));
}

Tensor masked_mse(const Tensor& pred, const Tensor& target,
                  const Tensor& mask) {
  require_same_shape("masked_mse", pred, target);
  require_same_shape("masked_mse", pred, mask);
  const std::size_t n = pred.values().size();
  double count = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) count += mask.values()[i];
  if (count <= 0.0)
    throw std::invalid_argument("masked_mse: mask selects no entries");
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = (pred.values()[i] - target.values()[i]) * mask.values()[i];
    acc += diff[i] * diff[i];
  }
  auto out = make_node({1}, 1);
  out->values[0] = acc / count;
  if (grad_enabled() && track(pred)) {
    out->tracked = true;
    out->parents = {pred.node()};
    NodePtr pn = pred.node();
    TensorNode* self = out.get();
    out->backprop = [pn, self, diff, count] {
      pn->ensure_grad();
      const double g = self->grad[0] * 2.0 / count;
      for (std::size_t i = 0; i < diff.size(); ++i)
        pn->grad[i] += g * diff[i];
    };
  }
  return Tensor(std::move(out));
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& target,
                       const Tensor& mask) {
  require_same_shape("bce_with_logits", logits, target);
  require_same_shape("bce_with_logits", logits, mask);
  const std::size_t n = logits.values().size();
  double count = 0.0;
  for (std::size_t i = 0; i < n; ++i) count += mask.values()[i];
  if (count <= 0.0)
    throw std::invalid_argument("bce_with_logits: mask selects no entries");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.values()[i] == 0.0) continue;
    const double z = logits.values()[i], y = target.values()[i];
    acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  auto out = make_node({1}, 1);
  out->values[0] = acc / count;
  if (grad_enabled() && track(logits)) {
    out->tracked = true;
    out->parents = {logits.node()};
    NodePtr ln = logits.node();
    std::vector<double> tv = target.values(), mv = mask.values();
    TensorNode* self = out.get();
    out->backprop = [ln, self, tv, mv, count] {
      ln->ensure_grad();
      const double g = self->grad[0] / count;
      for (std::size_t i = 0; i < tv.size(); ++i) {
        if (mv[i] == 0.0) continue;
        const double s = 1.0 / (1.0 + std::exp(-ln->values[i]));
        ln->grad[i] += g * (s - tv[i]);
      }
    };
  }
  return Tensor(std::move(out));
}

}  // namespace molpool
