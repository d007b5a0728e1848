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

#include <algorithm>
#include <cmath>
#include <thread>

#include "fuzzyseg/autoseed.hpp"
#include "fuzzyseg/error.hpp"
#include "fuzzyseg/kernels/kernels.hpp"

namespace fuzzyseg {

DistanceMatrix patch_distance_matrix(const PatchGrid& grid, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::kInvalidConfig, "lambda must be >= 0");
  const std::size_t n = grid.patches.size();
  const std::size_t bins = kHistogramBins;
  std::vector<double> probs(n * bins);
  std::vector<double> logs(n * bins);
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  const double sx = grid.image_width > 1 ? 1.0 / (grid.image_width - 1) : 1.0;
  const double sy = grid.image_height > 1 ? 1.0 / (grid.image_height - 1) : 1.0;
  const kernels::KernelTable& k = kernels::active();
  for (std::size_t i = 0; i < n; ++i) {
    const Patch& p = grid.patches[i];
    if (p.histogram.total() == 0) {
      throw Error(ErrorCode::kEmptyPatch, "patch " + std::to_string(i) + " has no pixels");
    }
    const Distribution s = p.histogram.smoothed(kPatchSmoothing);
    std::copy(s.begin(), s.end(), probs.begin() + static_cast<std::ptrdiff_t>(i * bins));
    k.log_array(probs.data() + i * bins, logs.data() + i * bins, bins);
    xs[i] = p.center_x * sx;
    ys[i] = p.center_y * sy;
  }

  DistanceMatrix d;
  d.n = n;
  d.values.assign(n * n, 0.0);
  auto fill_rows = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < n; i += step) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double kl = k.symmetric_kl_from_logs(probs.data() + i * bins, logs.data() + i * bins,
                                                   probs.data() + j * bins, logs.data() + j * bins, bins);
        const double v = 0.5 * std::max(kl, 0.0) + lambda * std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
        d.values[i * n + j] = v;
        d.values[j * n + i] = v;
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n / 64 + 1);
  if (workers <= 1) {
    fill_rows(0, 1);
  } else {
    // Interleaved rows balance the triangular workload.
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(fill_rows, t, workers);
    for (auto& t : pool) t.join();
  }
  return d;
}

}  // namespace fuzzyseg
