// Copyright 2026 Voxpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPUID check.
// Reductions and matmuls sum in a different order than the scalar
// reference, so they agree within rounding, not bitwise; pure lane-wise
// elementwise kernels are bit-exact against scalar.

#include "voxpatch/kernels/kernels.hpp"

#include <immintrin.h>

#include "voxpatch/kernels/scalar_impl.hpp"

namespace voxpatch::kernels {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline float hmax8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_max_ps(lo, hi);
  lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_max_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

void add_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(float s, const float* x, float* out, std::size_t n) {
  const __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(vs, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) out[i] = s * x[i];
}

void axpy_avx2(float s, const float* x, float* y, std::size_t n) {
  const __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        y + i, _mm256_fmadd_ps(vs, _mm256_loadu_ps(x + i),
                               _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += s * x[i];
}

void relu_avx2(const float* x, float* out, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_max_ps(zero, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_avx2(const float* x, const float* dy, float* dx,
                        std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    __m256 gated = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
    _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), gated));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0f) dx[i] += dy[i];
  }
}

float dot_avx2(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                           acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),
                           _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                           acc0);
  }
  float r = hsum8(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

float sum_avx2(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float r = hsum8(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

float max_avx2(const float* x, std::size_t n) {
  if (n < 8) return scalar::max(x, n);
  __m256 vm = _mm256_loadu_ps(x);
  std::size_t i = 8;
  for (; i + 8 <= n; i += 8) vm = _mm256_max_ps(vm, _mm256_loadu_ps(x + i));
  float m = hmax8(vm);
  for (; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

// C += A*B with a 4-row x 16-column FMA microkernel; remainders go through
// the scalar reference on the leftover strip.
void matmul_nn_avx2(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const float* a0 = a + (i + 0) * lda;
    const float* a1 = a + (i + 1) * lda;
    const float* a2 = a + (i + 2) * lda;
    const float* a3 = a + (i + 3) * lda;
    float* c0 = c + (i + 0) * ldc;
    float* c1 = c + (i + 1) * ldc;
    float* c2 = c + (i + 2) * ldc;
    float* c3 = c + (i + 3) * ldc;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 r00 = _mm256_loadu_ps(c0 + j), r01 = _mm256_loadu_ps(c0 + j + 8);
      __m256 r10 = _mm256_loadu_ps(c1 + j), r11 = _mm256_loadu_ps(c1 + j + 8);
      __m256 r20 = _mm256_loadu_ps(c2 + j), r21 = _mm256_loadu_ps(c2 + j + 8);
      __m256 r30 = _mm256_loadu_ps(c3 + j), r31 = _mm256_loadu_ps(c3 + j + 8);
      for (std::size_t l = 0; l < k; ++l) {
        const float* brow = b + l * ldb + j;
        __m256 b0 = _mm256_loadu_ps(brow);
        __m256 b1 = _mm256_loadu_ps(brow + 8);
        __m256 v0 = _mm256_broadcast_ss(a0 + l);
        __m256 v1 = _mm256_broadcast_ss(a1 + l);
        r00 = _mm256_fmadd_ps(v0, b0, r00);
        r01 = _mm256_fmadd_ps(v0, b1, r01);
        r10 = _mm256_fmadd_ps(v1, b0, r10);
        r11 = _mm256_fmadd_ps(v1, b1, r11);
        __m256 v2 = _mm256_broadcast_ss(a2 + l);
        __m256 v3 = _mm256_broadcast_ss(a3 + l);
        r20 = _mm256_fmadd_ps(v2, b0, r20);
        r21 = _mm256_fmadd_ps(v2, b1, r21);
        r30 = _mm256_fmadd_ps(v3, b0, r30);
        r31 = _mm256_fmadd_ps(v3, b1, r31);
      }
      _mm256_storeu_ps(c0 + j, r00);
      _mm256_storeu_ps(c0 + j + 8, r01);
      _mm256_storeu_ps(c1 + j, r10);
      _mm256_storeu_ps(c1 + j + 8, r11);
      _mm256_storeu_ps(c2 + j, r20);
      _mm256_storeu_ps(c2 + j + 8, r21);
      _mm256_storeu_ps(c3 + j, r30);
      _mm256_storeu_ps(c3 + j + 8, r31);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 r0 = _mm256_loadu_ps(c0 + j);
      __m256 r1 = _mm256_loadu_ps(c1 + j);
      __m256 r2 = _mm256_loadu_ps(c2 + j);
      __m256 r3 = _mm256_loadu_ps(c3 + j);
      for (std::size_t l = 0; l < k; ++l) {
        __m256 bv = _mm256_loadu_ps(b + l * ldb + j);
        r0 = _mm256_fmadd_ps(_mm256_broadcast_ss(a0 + l), bv, r0);
        r1 = _mm256_fmadd_ps(_mm256_broadcast_ss(a1 + l), bv, r1);
        r2 = _mm256_fmadd_ps(_mm256_broadcast_ss(a2 + l), bv, r2);
        r3 = _mm256_fmadd_ps(_mm256_broadcast_ss(a3 + l), bv, r3);
      }
      _mm256_storeu_ps(c0 + j, r0);
      _mm256_storeu_ps(c1 + j, r1);
      _mm256_storeu_ps(c2 + j, r2);
      _mm256_storeu_ps(c3 + j, r3);
    }
    if (j < n) {
      scalar::matmul_nn(a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, 4,
                        k, n - j);
    }
  }
  if (i < m) {
    scalar::matmul_nn(a + i * lda, lda, b, ldb, c + i * ldc, ldc, m - i, k, n);
  }
}

// C += A*B^T: vectorized dot products, four B rows per pass.
void matmul_nt_avx2(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * lda;
    float* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const float* b0 = b + (j + 0) * ldb;
      const float* b1 = b + (j + 1) * ldb;
      const float* b2 = b + (j + 2) * ldb;
      const float* b3 = b + (j + 3) * ldb;
      __m256 acc0 = _mm256_setzero_ps();
      __m256 acc1 = _mm256_setzero_ps();
      __m256 acc2 = _mm256_setzero_ps();
      __m256 acc3 = _mm256_setzero_ps();
      std::size_t l = 0;
      for (; l + 8 <= k; l += 8) {
        __m256 av = _mm256_loadu_ps(arow + l);
        acc0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + l), acc0);
        acc1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + l), acc1);
        acc2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + l), acc2);
        acc3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + l), acc3);
      }
      float s0 = hsum8(acc0), s1 = hsum8(acc1);
      float s2 = hsum8(acc2), s3 = hsum8(acc3);
      for (; l < k; ++l) {
        const float av = arow[l];
        s0 += av * b0[l];
        s1 += av * b1[l];
        s2 += av * b2[l];
        s3 += av * b3[l];
      }
      crow[j + 0] += s0;
      crow[j + 1] += s1;
      crow[j + 2] += s2;
      crow[j + 3] += s3;
    }
    for (; j < n; ++j) {
      crow[j] += dot_avx2(arow, b + j * ldb, k);
    }
  }
}

// C += A^T*B: same microkernel shape as NN with strided broadcasts from A.
void matmul_tn_avx2(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    float* c0 = c + (i + 0) * ldc;
    float* c1 = c + (i + 1) * ldc;
    float* c2 = c + (i + 2) * ldc;
    float* c3 = c + (i + 3) * ldc;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 r00 = _mm256_loadu_ps(c0 + j), r01 = _mm256_loadu_ps(c0 + j + 8);
      __m256 r10 = _mm256_loadu_ps(c1 + j), r11 = _mm256_loadu_ps(c1 + j + 8);
      __m256 r20 = _mm256_loadu_ps(c2 + j), r21 = _mm256_loadu_ps(c2 + j + 8);
      __m256 r30 = _mm256_loadu_ps(c3 + j), r31 = _mm256_loadu_ps(c3 + j + 8);
      for (std::size_t l = 0; l < k; ++l) {
        const float* acol = a + l * lda + i;
        const float* brow = b + l * ldb + j;
        __m256 b0 = _mm256_loadu_ps(brow);
        __m256 b1 = _mm256_loadu_ps(brow + 8);
        __m256 v0 = _mm256_broadcast_ss(acol + 0);
        __m256 v1 = _mm256_broadcast_ss(acol + 1);
        r00 = _mm256_fmadd_ps(v0, b0, r00);
        r01 = _mm256_fmadd_ps(v0, b1, r01);
        r10 = _mm256_fmadd_ps(v1, b0, r10);
        r11 = _mm256_fmadd_ps(v1, b1, r11);
        __m256 v2 = _mm256_broadcast_ss(acol + 2);
        __m256 v3 = _mm256_broadcast_ss(acol + 3);
        r20 = _mm256_fmadd_ps(v2, b0, r20);
        r21 = _mm256_fmadd_ps(v2, b1, r21);
        r30 = _mm256_fmadd_ps(v3, b0, r30);
        r31 = _mm256_fmadd_ps(v3, b1, r31);
      }
      _mm256_storeu_ps(c0 + j, r00);
      _mm256_storeu_ps(c0 + j + 8, r01);
      _mm256_storeu_ps(c1 + j, r10);
      _mm256_storeu_ps(c1 + j + 8, r11);
      _mm256_storeu_ps(c2 + j, r20);
      _mm256_storeu_ps(c2 + j + 8, r21);
      _mm256_storeu_ps(c3 + j, r30);
      _mm256_storeu_ps(c3 + j + 8, r31);
    }
    if (j < n) {
      scalar::matmul_tn(a + i, lda, b + j, ldb, c + i * ldc + j, ldc, 4, k,
                        n - j);
    }
  }
  if (i < m) {
    scalar::matmul_tn(a + i, lda, b, ldb, c + i * ldc, ldc, m - i, k, n);
  }
}

const KernelTable kAvx2Table = {
    add_avx2,     sub_avx2, mul_avx2,      scale_avx2,     axpy_avx2,
    relu_avx2,    relu_backward_avx2,      dot_avx2,       sum_avx2,
    max_avx2,     matmul_nn_avx2,          matmul_nt_avx2, matmul_tn_avx2,
};

}  // namespace

const KernelTable* avx2_table_impl() { return &kAvx2Table; }

}  // namespace voxpatch::kernels
