// Copyright 2026 The fuzzyseg Authors
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

// Histogram divergence kernels.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is picked
// once at startup from the CPU features; FUZZYSEG_SIMD=scalar|avx2|neon forces a
// particular table when it is available. All variants agree with the scalar
// reference to within a few ulps per bin; they are not bit-identical because the
// vector paths sum in lanes and use a polynomial logarithm.

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace fuzzyseg::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;

  // Sum over bins with q > 0 of q * log(q / r). Returns +inf when some bin has
  // q > 0 and r == 0.
  double (*kl_divergence)(const double* q, const double* r, std::size_t n);

  // Sum over bins with r > 0 of r * log(r / (alpha * q + (1 - alpha) * r)).
  // Returns +inf only when the mixture vanishes under positive r (alpha == 1).
  double (*skew_divergence)(const double* q, const double* r, double alpha, std::size_t n);

  // Sum of (p - s) * (log_p - log_s): KL(p||s) + KL(s||p) for strictly
  // positive distributions whose logs are precomputed.
  double (*symmetric_kl_from_logs)(const double* p, const double* log_p, const double* s,
                                   const double* log_s, std::size_t n);

  // out[i] = log(x[i]) for x[i] > 0.
  void (*log_array)(const double* x, double* out, std::size_t n);
};

std::string_view name(Isa isa);

/// Table for a specific ISA, or nullptr when this build/CPU cannot run it.
const KernelTable* table(Isa isa);

/// Every ISA that can run here, scalar first.
std::vector<Isa> available();

/// The table selected at startup.
const KernelTable& active();

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace fuzzyseg::kernels
