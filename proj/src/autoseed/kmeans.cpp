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
#include <limits>
#include <random>

#include "fuzzyseg/autoseed.hpp"
#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

namespace {

struct Points {
  std::size_t n;
  std::size_t dim;
  const double* data;

  const double* row(std::size_t i) const { return data + i * dim; }
};

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

std::vector<double> plus_plus_init(const Points& p, int k, std::mt19937_64& rng) {
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(k) * p.dim);
  std::vector<bool> chosen(p.n, false);
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centers.insert(centers.end(), p.row(i), p.row(i) + p.dim);
  };
  take(std::uniform_int_distribution<std::size_t>(0, p.n - 1)(rng));
  std::vector<double> d2(p.n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    const double* last = centers.data() + static_cast<std::size_t>(c - 1) * p.dim;
    double total = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(p.row(i), last, p.dim));
      total += d2[i];
    }
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
      take(pick(rng));
    } else {
      // Every point coincides with a center: pick uniformly among unused points.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < p.n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      take(free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)]);
    }
  }
  return centers;
}

KMeansResult lloyd(const Points& p, int k, std::vector<double> centers, int max_iterations) {
  const std::size_t kk = static_cast<std::size_t>(k);
  KMeansResult r;
  r.k = k;
  std::vector<int> labels(p.n, -1);
  std::vector<double> dist(p.n, 0.0);
  std::vector<std::size_t> counts(kk);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < p.n; ++i) {
      int best = 0;
      double best_d = sq_dist(p.row(i), centers.data(), p.dim);
      for (std::size_t c = 1; c < kk; ++c) {
        const double dc = sq_dist(p.row(i), centers.data() + c * p.dim, p.dim);
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
      dist[i] = best_d;
    }
    // Refill empty clusters with the farthest point of the largest one.
    for (;;) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int l : labels) ++counts[static_cast<std::size_t>(l)];
      const auto empty = std::find(counts.begin(), counts.end(), std::size_t{0});
      if (empty == counts.end()) break;
      const int largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t far = p.n;
      for (std::size_t i = 0; i < p.n; ++i) {
        if (labels[i] == largest && (far == p.n || dist[i] > dist[far])) far = i;
      }
      labels[far] = static_cast<int>(empty - counts.begin());
      dist[far] = 0.0;
      changed = true;
    }
    std::fill(centers.begin(), centers.end(), 0.0);
    for (std::size_t i = 0; i < p.n; ++i) {
      double* c = centers.data() + static_cast<std::size_t>(labels[i]) * p.dim;
      for (std::size_t d = 0; d < p.dim; ++d) c[d] += p.row(i)[d];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      for (std::size_t d = 0; d < p.dim; ++d) centers[c * p.dim + d] /= static_cast<double>(counts[c]);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      inertia += sq_dist(p.row(i), centers.data() + static_cast<std::size_t>(labels[i]) * p.dim, p.dim);
    }
    r.inertia_history.push_back(inertia);
    r.iterations = it + 1;
    if (!changed) break;
  }
  r.inertia = r.inertia_history.back();
  r.centers = std::move(centers);
  r.labels.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) r.labels[i] = labels[i] + 1;
  return r;
}

}  // namespace

KMeansResult kmeans(const Embedding& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1 || static_cast<std::size_t>(k) > points.n) {
    throw Error(ErrorCode::kBadK, "k = " + std::to_string(k) + " must lie in 1.." + std::to_string(points.n));
  }
  if (options.max_iterations < 1 || options.restarts < 1) {
    throw Error(ErrorCode::kInvalidConfig, "k-means needs at least one iteration and one restart");
  }
  const Points p{points.n, static_cast<std::size_t>(points.dim), points.coords.data()};
  KMeansResult best;
  for (int run = 0; run < options.restarts; ++run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    KMeansResult r = lloyd(p, k, plus_plus_init(p, k, rng), options.max_iterations);
    if (run == 0 || r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

}  // namespace fuzzyseg
