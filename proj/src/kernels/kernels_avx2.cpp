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

// Built with -mavx2 -mfma. Keep standard-library templates out of this file:
// an AVX2 instantiation could be merged with the generic one at link time.

#include "fuzzyseg/kernels/kernels.hpp"

#if defined(FUZZYSEG_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace fuzzyseg::kernels {

namespace {

// Natural log of four positive, finite, normal doubles.
// x = 2^e * m with m folded into [sqrt(1/2), sqrt(2)); log m = 2 atanh(f) with
// f = (m - 1) / (m + 1), |f| <= 0.1716, evaluated as an odd series in f whose
// truncation error is below 1e-17 relative after 11 terms.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_field = _mm256_srli_epi64(bits, 52);
  // int64 -> double for values below 2^52 via the 2^52 magic constant.
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_field, magic_bits)),
                            _mm256_set1_pd(4503599627370496.0));
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, one));

  const __m256d f = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s = _mm256_mul_pd(f, f);
  __m256d p = _mm256_set1_pd(1.0 / 21.0);
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 3.0));
  // 2 f (1 + s p) = 2f + 2f s p
  const __m256d two_f = _mm256_add_pd(f, f);
  const __m256d log_m = _mm256_fmadd_pd(_mm256_mul_pd(two_f, s), p, two_f);

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  return _mm256_fmadd_pd(e, ln2_hi, _mm256_fmadd_pd(e, ln2_lo, log_m));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double kl_divergence_avx2(const double* q, const double* r, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = zero;
  __m256d undefined = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d qv = _mm256_loadu_pd(q + i);
    const __m256d rv = _mm256_loadu_pd(r + i);
    const __m256d live = _mm256_cmp_pd(qv, zero, _CMP_GT_OQ);
    const __m256d r_ok = _mm256_cmp_pd(rv, zero, _CMP_GT_OQ);
    undefined = _mm256_or_pd(undefined, _mm256_andnot_pd(r_ok, live));
    const __m256d ratio = _mm256_blendv_pd(one, _mm256_div_pd(qv, rv), _mm256_and_pd(live, r_ok));
    acc = _mm256_fmadd_pd(_mm256_and_pd(live, qv), log_pd(ratio), acc);
  }
  if (_mm256_movemask_pd(undefined) != 0) return std::numeric_limits<double>::infinity();
  double sum = hsum(acc);
  for (; i < n; ++i) {
    if (q[i] <= 0.0) continue;
    if (r[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += q[i] * std::log(q[i] / r[i]);
  }
  return sum;
}

double skew_divergence_avx2(const double* q, const double* r, double alpha, std::size_t n) {
  const double beta = 1.0 - alpha;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d bv = _mm256_set1_pd(beta);
  __m256d acc = zero;
  __m256d undefined = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d qv = _mm256_loadu_pd(q + i);
    const __m256d rv = _mm256_loadu_pd(r + i);
    const __m256d live = _mm256_cmp_pd(rv, zero, _CMP_GT_OQ);
    const __m256d mix = _mm256_fmadd_pd(av, qv, _mm256_mul_pd(bv, rv));
    const __m256d mix_ok = _mm256_cmp_pd(mix, zero, _CMP_GT_OQ);
    undefined = _mm256_or_pd(undefined, _mm256_andnot_pd(mix_ok, live));
    const __m256d ratio = _mm256_blendv_pd(one, _mm256_div_pd(rv, mix), _mm256_and_pd(live, mix_ok));
    acc = _mm256_fmadd_pd(_mm256_and_pd(live, rv), log_pd(ratio), acc);
  }
  if (_mm256_movemask_pd(undefined) != 0) return std::numeric_limits<double>::infinity();
  double sum = hsum(acc);
  for (; i < n; ++i) {
    if (r[i] <= 0.0) continue;
    const double mix = alpha * q[i] + beta * r[i];
    if (mix <= 0.0) return std::numeric_limits<double>::infinity();
    sum += r[i] * std::log(r[i] / mix);
  }
  return sum;
}

double symmetric_kl_from_logs_avx2(const double* p, const double* log_p, const double* s, const double* log_s,
                                   std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(s + i));
    const __m256d l0 = _mm256_sub_pd(_mm256_loadu_pd(log_p + i), _mm256_loadu_pd(log_s + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 4), _mm256_loadu_pd(s + i + 4));
    const __m256d l1 = _mm256_sub_pd(_mm256_loadu_pd(log_p + i + 4), _mm256_loadu_pd(log_s + i + 4));
    acc0 = _mm256_fmadd_pd(d0, l0, acc0);
    acc1 = _mm256_fmadd_pd(d1, l1, acc1);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += (p[i] - s[i]) * (log_p[i] - log_s[i]);
  return sum;
}

void log_array_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, log_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::log(x[i]);
}

}  // namespace

namespace detail {

const KernelTable* avx2_table() {
  static const KernelTable t{Isa::kAvx2, kl_divergence_avx2, skew_divergence_avx2, symmetric_kl_from_logs_avx2,
                             log_array_avx2};
  return &t;
}

}  // namespace detail

}  // namespace fuzzyseg::kernels

#else

namespace fuzzyseg::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace fuzzyseg::kernels::detail

#endif
