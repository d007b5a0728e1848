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
#include <set>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/evalbench.hpp"

namespace fuzzyseg {

namespace {

void check_same_size(const LabelMap& a, const LabelMap& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                                   " vs " + std::to_string(b.width()) + "x" +
                                                   std::to_string(b.height()));
  }
}

// Minimum-cost assignment on a square matrix (Kuhn-Munkres with potentials).
// Returns, for each row, the assigned column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), way_min(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(way_min.begin(), way_min.end(), inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < way_min[j]) {
          way_min[j] = cur;
          way[j] = j0;
        }
        if (way_min[j] < delta) {
          delta = way_min[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          way_min[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

double dice(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "masks differ in size");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    both += a[i] && b[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double label_dice(const LabelMap& pred, int pred_label, const LabelMap& gt, int gt_label) {
  check_same_size(pred, gt);
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred.labels()[i] == pred_label;
    const bool b = gt.labels()[i] == gt_label;
    na += a;
    nb += b;
    both += a && b;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

DiceScore score(const LabelMap& pred, const LabelMap& gt) {
  check_same_size(pred, gt);
  DiceScore s;
  std::map<int, std::size_t> pred_sizes;
  std::map<int, std::size_t> overlap;
  std::size_t total = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt.labels()[i];
    const int p = pred.labels()[i];
    ++pred_sizes[p];
    if (g < 1) continue;
    ++s.sizes[g];
    ++total;
    if (p == g) ++overlap[g];
  }
  for (const auto& [label, size] : s.sizes) {
    const double d = 2.0 * static_cast<double>(overlap[label]) / static_cast<double>(size + pred_sizes[label]);
    s.per_object[label] = d;
    s.weighted += static_cast<double>(size) / static_cast<double>(total) * d;
  }
  return s;
}

double weighted_dice(const LabelMap& pred, const LabelMap& gt) { return score(pred, gt).weighted; }

std::map<int, int> match_labels(const LabelMap& pred, const LabelMap& gt) {
  check_same_size(pred, gt);
  std::set<int> pred_ids, gt_ids;
  for (int v : pred.labels()) {
    if (v >= 1) pred_ids.insert(v);
  }
  for (int v : gt.labels()) {
    if (v >= 1) gt_ids.insert(v);
  }
  std::map<int, int> mapping;
  if (pred_ids.empty()) return mapping;
  const std::vector<int> ps(pred_ids.begin(), pred_ids.end());
  const std::vector<int> gs(gt_ids.begin(), gt_ids.end());
  std::map<int, std::size_t> prow, gcol;
  for (std::size_t i = 0; i < ps.size(); ++i) prow[ps[i]] = i;
  for (std::size_t j = 0; j < gs.size(); ++j) gcol[gs[j]] = j;
  const std::size_t n = std::max(ps.size(), gs.size());
  std::vector<std::vector<double>> overlap(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred.labels()[i];
    const int g = gt.labels()[i];
    if (p >= 1 && g >= 1) overlap[prow[p]][gcol[g]] += 1.0;
  }
  double most = 0.0;
  for (const auto& row : overlap) most = std::max(most, *std::max_element(row.begin(), row.end()));
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = most - overlap[i][j];
  }
  const std::vector<int> assign = hungarian(cost);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const int j = assign[i];
    mapping[ps[i]] = j >= 0 && static_cast<std::size_t>(j) < gs.size() ? gs[static_cast<std::size_t>(j)] : 0;
  }
  return mapping;
}

LabelMap relabel(const LabelMap& labels, const std::map<int, int>& mapping) {
  std::vector<int> out(labels.labels().begin(), labels.labels().end());
  for (int& v : out) {
    const auto it = mapping.find(v);
    if (it != mapping.end()) v = it->second;
  }
  return LabelMap(labels.width(), labels.height(), std::move(out));
}

}  // namespace fuzzyseg
