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

#ifndef VOXPATCH_TENSOR_DISPATCH_HPP_
#define VOXPATCH_TENSOR_DISPATCH_HPP_

#include <cstddef>

#include "voxpatch/kernels/kernels.hpp"
#include "voxpatch/kernels/scalar_impl.hpp"

// Precision-keyed bridge to the kernel layer. float goes through the
// runtime-dispatched table; double always takes the scalar reference path
// (it only runs in gradient-verification mode).

namespace voxpatch {

template <typename Real>
struct Blas;

template <>
struct Blas<float> {
  static void add(const float* a, const float* b, float* o, std::size_t n) {
    kernels::active().add(a, b, o, n);
  }
  static void sub(const float* a, const float* b, float* o, std::size_t n) {
    kernels::active().sub(a, b, o, n);
  }
  static void mul(const float* a, const float* b, float* o, std::size_t n) {
    kernels::active().mul(a, b, o, n);
  }
  static void scale(float s, const float* x, float* o, std::size_t n) {
    kernels::active().scale(s, x, o, n);
  }
  static void axpy(float s, const float* x, float* y, std::size_t n) {
    kernels::active().axpy(s, x, y, n);
  }
  static void relu(const float* x, float* o, std::size_t n) {
    kernels::active().relu(x, o, n);
  }
  static void relu_backward(const float* x, const float* dy, float* dx,
                            std::size_t n) {
    kernels::active().relu_backward(x, dy, dx, n);
  }
  static float dot(const float* a, const float* b, std::size_t n) {
    return kernels::active().dot(a, b, n);
  }
  static float sum(const float* x, std::size_t n) {
    return kernels::active().sum(x, n);
  }
  static float max(const float* x, std::size_t n) {
    return kernels::active().max(x, n);
  }
  static void matmul_nn(const float* a, std::size_t lda, const float* b,
                        std::size_t ldb, float* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::active().matmul_nn(a, lda, b, ldb, c, ldc, m, k, n);
  }
  static void matmul_nt(const float* a, std::size_t lda, const float* b,
                        std::size_t ldb, float* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::active().matmul_nt(a, lda, b, ldb, c, ldc, m, k, n);
  }
  static void matmul_tn(const float* a, std::size_t lda, const float* b,
                        std::size_t ldb, float* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::active().matmul_tn(a, lda, b, ldb, c, ldc, m, k, n);
  }
};

template <>
struct Blas<double> {
  static void add(const double* a, const double* b, double* o, std::size_t n) {
    kernels::scalar::add(a, b, o, n);
  }
  static void sub(const double* a, const double* b, double* o, std::size_t n) {
    kernels::scalar::sub(a, b, o, n);
  }
  static void mul(const double* a, const double* b, double* o, std::size_t n) {
    kernels::scalar::mul(a, b, o, n);
  }
  static void scale(double s, const double* x, double* o, std::size_t n) {
    kernels::scalar::scale(s, x, o, n);
  }
  static void axpy(double s, const double* x, double* y, std::size_t n) {
    kernels::scalar::axpy(s, x, y, n);
  }
  static void relu(const double* x, double* o, std::size_t n) {
    kernels::scalar::relu(x, o, n);
  }
  static void relu_backward(const double* x, const double* dy, double* dx,
                            std::size_t n) {
    kernels::scalar::relu_backward(x, dy, dx, n);
  }
  static double dot(const double* a, const double* b, std::size_t n) {
    return kernels::scalar::dot(a, b, n);
  }
  static double sum(const double* x, std::size_t n) {
    return kernels::scalar::sum(x, n);
  }
  static double max(const double* x, std::size_t n) {
    return kernels::scalar::max(x, n);
  }
  static void matmul_nn(const double* a, std::size_t lda, const double* b,
                        std::size_t ldb, double* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::scalar::matmul_nn(a, lda, b, ldb, c, ldc, m, k, n);
  }
  static void matmul_nt(const double* a, std::size_t lda, const double* b,
                        std::size_t ldb, double* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::scalar::matmul_nt(a, lda, b, ldb, c, ldc, m, k, n);
  }
  static void matmul_tn(const double* a, std::size_t lda, const double* b,
                        std::size_t ldb, double* c, std::size_t ldc,
                        std::size_t m, std::size_t k, std::size_t n) {
    kernels::scalar::matmul_tn(a, lda, b, ldb, c, ldc, m, k, n);
  }
};

}  // namespace voxpatch

#endif  // VOXPATCH_TENSOR_DISPATCH_HPP_
