// Copyright 2026 The Trustbox Authors
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

#include "trustbox/kernels.hpp"

namespace trustbox::kernels {

namespace {
std::string_view g_active = "scalar";
}

void xor_bytes_scalar(uint8_t* dst, const uint8_t* src, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

XorFn xor_bytes_dispatch() {
#if defined(TRUSTBOX_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  if (__builtin_cpu_supports("avx2")) {
    g_active = "avx2";
    return xor_bytes_avx2;
  }
#endif
  g_active = "scalar";
  return xor_bytes_scalar;
}

std::string_view active_xor_kernel() {
  xor_bytes(nullptr, nullptr, 0);  // force dispatch
  return g_active;
}

}  // namespace trustbox::kernels
