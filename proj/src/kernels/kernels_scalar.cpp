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

#include <cmath>
#include <limits>

#include "fuzzyseg/kernels/kernels.hpp"

namespace fuzzyseg::kernels {

namespace {

double kl_divergence_scalar(const double* q, const double* r, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] <= 0.0) continue;
    if (r[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += q[i] * std::log(q[i] / r[i]);
  }
  return sum;
}

double skew_divergence_scalar(const double* q, const double* r, double alpha, std::size_t n) {
  const double beta = 1.0 - alpha;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] <= 0.0) continue;
    const double mix = alpha * q[i] + beta * r[i];
    if (mix <= 0.0) return std::numeric_limits<double>::infinity();
    sum += r[i] * std::log(r[i] / mix);
  }
  return sum;
}

double symmetric_kl_from_logs_scalar(const double* p, const double* log_p, const double* s,
                                     const double* log_s, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += (p[i] - s[i]) * (log_p[i] - log_s[i]);
  return sum;
}

void log_array_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

}  // namespace

namespace detail {

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::kScalar, kl_divergence_scalar, skew_divergence_scalar,
                             symmetric_kl_from_logs_scalar, log_array_scalar};
  return t;
}

}  // namespace detail

}  // namespace fuzzyseg::kernels
