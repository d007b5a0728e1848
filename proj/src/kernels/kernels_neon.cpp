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

#include "fuzzyseg/kernels/kernels.hpp"

#if defined(FUZZYSEG_HAVE_NEON)

#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace fuzzyseg::kernels {

namespace {

// Same reduction and series as the AVX2 log; two lanes.
inline float64x2_t log_f64(float64x2_t x) {
  const uint64x2_t bits = vreinterpretq_u64_f64(x);
  const int64x2_t exp_field = vreinterpretq_s64_u64(vshrq_n_u64(bits, 52));
  float64x2_t e = vsubq_f64(vcvtq_f64_s64(exp_field), vdupq_n_f64(1023.0));

  const uint64x2_t mant = vandq_u64(bits, vdupq_n_u64(0x000FFFFFFFFFFFFFULL));
  float64x2_t m = vreinterpretq_f64_u64(vorrq_u64(mant, vdupq_n_u64(0x3FF0000000000000ULL)));

  const float64x2_t one = vdupq_n_f64(1.0);
  const uint64x2_t big = vcgtq_f64(m, vdupq_n_f64(1.4142135623730951));
  m = vbslq_f64(big, vmulq_n_f64(m, 0.5), m);
  e = vaddq_f64(e, vreinterpretq_f64_u64(vandq_u64(big, vreinterpretq_u64_f64(one))));

  const float64x2_t f = vdivq_f64(vsubq_f64(m, one), vaddq_f64(m, one));
  const float64x2_t s = vmulq_f64(f, f);
  float64x2_t p = vdupq_n_f64(1.0 / 21.0);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 19.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 17.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 15.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 13.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 11.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 9.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 7.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 5.0), p, s);
  p = vfmaq_f64(vdupq_n_f64(1.0 / 3.0), p, s);
  const float64x2_t two_f = vaddq_f64(f, f);
  const float64x2_t log_m = vfmaq_f64(two_f, vmulq_f64(two_f, s), p);

  const float64x2_t lo = vfmaq_f64(log_m, e, vdupq_n_f64(1.90821492927058770002e-10));
  return vfmaq_f64(lo, e, vdupq_n_f64(6.93147180369123816490e-01));
}

inline float64x2_t masked(uint64x2_t mask, float64x2_t v) {
  return vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(v)));
}

double kl_divergence_neon(const double* q, const double* r, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t acc = zero;
  uint64x2_t undefined = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t qv = vld1q_f64(q + i);
    const float64x2_t rv = vld1q_f64(r + i);
    const uint64x2_t live = vcgtq_f64(qv, zero);
    const uint64x2_t r_ok = vcgtq_f64(rv, zero);
    undefined = vorrq_u64(undefined, vbicq_u64(live, r_ok));
    const float64x2_t ratio = vbslq_f64(vandq_u64(live, r_ok), vdivq_f64(qv, rv), one);
    acc = vfmaq_f64(acc, masked(live, qv), log_f64(ratio));
  }
  if ((vgetq_lane_u64(undefined, 0) | vgetq_lane_u64(undefined, 1)) != 0) {
    return std::numeric_limits<double>::infinity();
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    if (q[i] <= 0.0) continue;
    if (r[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += q[i] * std::log(q[i] / r[i]);
  }
  return sum;
}

double skew_divergence_neon(const double* q, const double* r, double alpha, std::size_t n) {
  const double beta = 1.0 - alpha;
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t acc = zero;
  uint64x2_t undefined = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t qv = vld1q_f64(q + i);
    const float64x2_t rv = vld1q_f64(r + i);
    const uint64x2_t live = vcgtq_f64(rv, zero);
    const float64x2_t mix = vfmaq_n_f64(vmulq_n_f64(rv, beta), qv, alpha);
    const uint64x2_t mix_ok = vcgtq_f64(mix, zero);
    undefined = vorrq_u64(undefined, vbicq_u64(live, mix_ok));
    const float64x2_t ratio = vbslq_f64(vandq_u64(live, mix_ok), vdivq_f64(rv, mix), one);
    acc = vfmaq_f64(acc, masked(live, rv), log_f64(ratio));
  }
  if ((vgetq_lane_u64(undefined, 0) | vgetq_lane_u64(undefined, 1)) != 0) {
    return std::numeric_limits<double>::infinity();
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    if (r[i] <= 0.0) continue;
    const double mix = alpha * q[i] + beta * r[i];
    if (mix <= 0.0) return std::numeric_limits<double>::infinity();
    sum += r[i] * std::log(r[i] / mix);
  }
  return sum;
}

double symmetric_kl_from_logs_neon(const double* p, const double* log_p, const double* s, const double* log_s,
                                   std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(p + i), vld1q_f64(s + i));
    const float64x2_t l0 = vsubq_f64(vld1q_f64(log_p + i), vld1q_f64(log_s + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(p + i + 2), vld1q_f64(s + i + 2));
    const float64x2_t l1 = vsubq_f64(vld1q_f64(log_p + i + 2), vld1q_f64(log_s + i + 2));
    acc0 = vfmaq_f64(acc0, d0, l0);
    acc1 = vfmaq_f64(acc1, d1, l1);
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += (p[i] - s[i]) * (log_p[i] - log_s[i]);
  return sum;
}

void log_array_neon(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, log_f64(vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = std::log(x[i]);
}

}  // namespace

namespace detail {

const KernelTable* neon_table() {
  static const KernelTable t{Isa::kNeon, kl_divergence_neon, skew_divergence_neon, symmetric_kl_from_logs_neon,
                             log_array_neon};
  return &t;
}

}  // namespace detail

}  // namespace fuzzyseg::kernels

#else

namespace fuzzyseg::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace fuzzyseg::kernels::detail

#endif
