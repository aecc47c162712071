// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers reach it only through the dispatch table after a
// runtime CPU check. Elementwise kernels and adam avoid FMA contraction so
// their results stay bitwise identical to the scalar reference; the matmul
// family and the reductions use FMA and lane-parallel accumulators.

#include "molpool/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace molpool::kernels {
namespace {

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  }
  for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // mul+add, not FMA: keeps results bitwise equal to the scalar kernel
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = alpha * x[i];
    y[i] = y[i] + prod;
  }
}

void relu_avx2(const double* a, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), zero));
  }
  for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i];
  return s;
}

void matmul_nn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc) {
  if (!acc && m * n > 0) std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d aip = _mm256_set1_pd(arow[p]);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d cv = _mm256_loadu_pd(crow + j);
        _mm256_storeu_pd(crow + j,
                         _mm256_fmadd_pd(aip, _mm256_loadu_pd(brow + j), cv));
      }
      const double aps = arow[p];
      for (; j < n; ++j) crow[j] += aps * brow[j];
    }
  }
}

void matmul_nt_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = dot_avx2(arow, b + j * k, k);
      if (acc)
        crow[j] += s;
      else
        crow[j] = s;
    }
  }
}

void matmul_tn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool acc) {
  if (!acc && k * n > 0) std::memset(c, 0, k * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d aip = _mm256_set1_pd(arow[p]);
      double* crow = c + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d cv = _mm256_loadu_pd(crow + j);
        _mm256_storeu_pd(crow + j,
                         _mm256_fmadd_pd(aip, _mm256_loadu_pd(brow + j), cv));
      }
      const double aps = arow[p];
      for (; j < n; ++j) crow[j] += aps * brow[j];
    }
  }
}

void adam_avx2(double* param, const double* grad, double* m, double* v,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bias1, double bias2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbias1 = _mm256_set1_pd(bias1);
  const __m256d vbias2 = _mm256_set1_pd(bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mi = _mm256_loadu_pd(m + i);
    __m256d vi = _mm256_loadu_pd(v + i);
    mi = _mm256_add_pd(_mm256_mul_pd(vb1, mi), _mm256_mul_pd(vc1, g));
    const __m256d g2 = _mm256_mul_pd(g, g);
    vi = _mm256_add_pd(_mm256_mul_pd(vb2, vi), _mm256_mul_pd(vc2, g2));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, vbias1);
    const __m256d vhat = _mm256_div_pd(vi, vbias2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(param + i,
                     _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable* avx2_table_impl() {
  static const KernelTable table{
      "avx2",        add_avx2,       sub_avx2,       mul_avx2,
      scale_avx2,    axpy_avx2,      relu_avx2,      dot_avx2,
      sum_avx2,      matmul_nn_avx2, matmul_nt_avx2, matmul_tn_avx2,
      adam_avx2,
  };
  return &table;
}

}  // namespace molpool::kernels

#else

namespace molpool::kernels {
const KernelTable* avx2_table_impl() { return nullptr; }
}  // namespace molpool::kernels

#endif
