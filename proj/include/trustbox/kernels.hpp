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

#ifndef TRUSTBOX_KERNELS_HPP
#define TRUSTBOX_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace trustbox::kernels {

// dst[i] ^= src[i]. The scrambler applies the keystream to every payload
// byte through this kernel, so it gets a vectorized variant; everything else
// in the codebase is control logic and stays scalar.
using XorFn = void (*)(uint8_t* dst, const uint8_t* src, size_t n);

void xor_bytes_scalar(uint8_t* dst, const uint8_t* src, size_t n);
#if defined(__x86_64__) || defined(_M_X64)
void xor_bytes_avx2(uint8_t* dst, const uint8_t* src, size_t n);
#endif

// Best variant for the running CPU, chosen once at startup.
XorFn xor_bytes_dispatch();
std::string_view active_xor_kernel();

inline void xor_bytes(uint8_t* dst, const uint8_t* src, size_t n) {
  static const XorFn fn = xor_bytes_dispatch();
  fn(dst, src, n);
}

}  // namespace trustbox::kernels

#endif  // TRUSTBOX_KERNELS_HPP
