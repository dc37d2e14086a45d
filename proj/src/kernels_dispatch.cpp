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

#include "voxpatch/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "voxpatch/errors.hpp"
#include "voxpatch/kernels/scalar_impl.hpp"

namespace voxpatch::kernels {

#if VOXPATCH_HAVE_AVX2
const KernelTable* avx2_table_impl();  // defined in kernels_avx2.cpp
#endif

namespace {

const KernelTable kScalarTable = {
    scalar::add<float>,
    scalar::sub<float>,
    scalar::mul<float>,
    scalar::scale<float>,
    scalar::axpy<float>,
    scalar::relu<float>,
    scalar::relu_backward<float>,
    scalar::dot<float>,
    scalar::sum<float>,
    scalar::max<float>,
    scalar::matmul_nn<float>,
    scalar::matmul_nt<float>,
    scalar::matmul_tn<float>,
};

bool cpu_has_avx2() {
#if VOXPATCH_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend resolve_backend() {
  if (const char* env = std::getenv("VOXPATCH_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2()) {
        throw ValueError("VOXPATCH_KERNELS=avx2 but AVX2 is not available");
      }
      return Backend::kAvx2;
    }
    if (std::strcmp(env, "auto") != 0) {
      throw ValueError(std::string("unknown VOXPATCH_KERNELS value: ") + env);
    }
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

// Resolved once; force_backend() may override (tests only, single-threaded).
Backend g_backend = Backend::kScalar;
bool g_resolved = false;

void ensure_resolved() {
  if (!g_resolved) {
    g_backend = resolve_backend();
    g_resolved = true;
  }
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalarTable; }

bool avx2_available() { return cpu_has_avx2(); }

const KernelTable& avx2_table() {
#if VOXPATCH_HAVE_AVX2
  if (cpu_has_avx2()) return *avx2_table_impl();
#endif
  throw ValueError("AVX2 kernels are not available on this machine");
}

const KernelTable& active() {
  ensure_resolved();
#if VOXPATCH_HAVE_AVX2
  if (g_backend == Backend::kAvx2) return *avx2_table_impl();
#endif
  return kScalarTable;
}

Backend active_backend() {
  ensure_resolved();
  return g_backend;
}

void force_backend(Backend b) {
  if (b == Backend::kAvx2 && !cpu_has_avx2()) {
    throw ValueError("cannot force AVX2 kernels: not available");
  }
  g_backend = b;
  g_resolved = true;
}

}  // namespace voxpatch::kernels
