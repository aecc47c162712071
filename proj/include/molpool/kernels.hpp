#pragma once

#include <cstddef>

namespace molpool::kernels {

// Contiguous-array kernels backing every tensor operation. Two variants
// exist: a portable scalar reference and an AVX2+FMA implementation picked
// at runtime. Non-reduction kernels (add..relu, adam) are bitwise identical
// across variants; reductions (dot, sum, matmul) may reassociate and agree
// to <= 1e-12 relative error.
struct KernelTable {
  const char* name;

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*scale)(const double* a, double s, double* out, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*relu)(const double* a, double* out, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);

  // c (m x n) = a (m x k) . b (k x n); accumulates into c when acc is set
  void (*matmul_nn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc);
  // c (m x n) = a (m x k) . b^T, with b stored as (n x k)
  void (*matmul_nt)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc);
  // c (k x n) = a^T . b, with a stored as (m x k), b as (m x n)
  void (*matmul_tn)(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc);

  // Fused Adam update. bias1 = 1 - beta1^t, bias2 = 1 - beta2^t.
  void (*adam)(double* param, const double* grad, double* m, double* v,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bias1, double bias2);
};

const KernelTable& scalar();

// nullptr when the binary or the CPU lacks AVX2/FMA support.
const KernelTable* avx2();

// AVX2 when available, unless MOLPOOL_KERNELS={scalar,avx2} overrides.
const KernelTable& active();

}  // namespace molpool::kernels
