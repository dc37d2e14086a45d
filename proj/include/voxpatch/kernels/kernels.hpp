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

#ifndef VOXPATCH_KERNELS_KERNELS_HPP_
#define VOXPATCH_KERNELS_KERNELS_HPP_

#include <cstddef>

// Data-parallel inner loops behind the tensor engine. Every entry point has
// a scalar reference implementation and may have SIMD variants; the active
// table is chosen once at runtime from CPU capabilities (override with the
// VOXPATCH_KERNELS environment variable or force_backend()).
//
// Matmul kernels ACCUMULATE into C (C += op(A)*op(B)) and take explicit row
// strides so attention heads can work on column slices in place. All matrix
// arguments are row-major.

namespace voxpatch::kernels {

enum class Backend { kScalar, kAvx2 };

const char* backend_name(Backend b);

struct KernelTable {
  // Elementwise, all buffers length n. `out` may alias an input.
  void (*add)(const float* a, const float* b, float* out, std::size_t n);
  void (*sub)(const float* a, const float* b, float* out, std::size_t n);
  void (*mul)(const float* a, const float* b, float* out, std::size_t n);
  void (*scale)(float s, const float* x, float* out, std::size_t n);
  // y += s * x
  void (*axpy)(float s, const float* x, float* y, std::size_t n);
  void (*relu)(const float* x, float* out, std::size_t n);
  // dx += (x > 0) ? dy : 0
  void (*relu_backward)(const float* x, const float* dy, float* dx,
                        std::size_t n);

  // Reductions.
  float (*dot)(const float* a, const float* b, std::size_t n);
  float (*sum)(const float* x, std::size_t n);
  float (*max)(const float* x, std::size_t n);  // n >= 1

  // C[m x n] += A[m x k] * B[k x n]
  void (*matmul_nn)(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*matmul_nt)(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*matmul_tn)(const float* a, std::size_t lda, const float* b,
                    std::size_t ldb, float* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n);
};

// The table picked for this process. First call resolves the backend.
const KernelTable& active();
Backend active_backend();

// Test hook: force a specific backend (throws ValueError if unavailable).
void force_backend(Backend b);

// Individual tables, for equivalence tests.
const KernelTable& scalar_table();
bool avx2_available();
const KernelTable& avx2_table();  // throws ValueError when unavailable

}  // namespace voxpatch::kernels

#endif  // VOXPATCH_KERNELS_KERNELS_HPP_
