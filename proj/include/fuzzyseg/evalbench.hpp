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

#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/image.hpp"
#include "fuzzyseg/image_io.hpp"
#include "fuzzyseg/mofs.hpp"

namespace fuzzyseg {

/// 2|a & b| / (|a| + |b|) for boolean masks; 1 when both are empty.
double dice(const std::vector<bool>& a, const std::vector<bool>& b);

/// Dice of label `pred_label` in `pred` against `gt_label` in `gt`.
double label_dice(const LabelMap& pred, int pred_label, const LabelMap& gt, int gt_label);

struct DiceScore {
  std::map<int, double> per_object;  // ground-truth label -> Dice
  std::map<int, std::size_t> sizes;  // ground-truth label -> pixel count
  double weighted = 0.0;
};

/// Per-object Dice over ground-truth labels >= 1, averaged with weights
/// proportional to object size. Predicted ids must already match.
DiceScore score(const LabelMap& pred, const LabelMap& gt);
double weighted_dice(const LabelMap& pred, const LabelMap& gt);

/// Predicted label -> ground-truth label maximizing the total overlap.
/// Predicted labels left without a partner map to 0.
std::map<int, int> match_labels(const LabelMap& pred, const LabelMap& gt);

LabelMap relabel(const LabelMap& labels, const std::map<int, int>& mapping);

/// palette[owner] scaled by sigma_0, owner = lowest member id; black where
/// sigma_0 = 0. Throws PaletteTooSmall when the palette lacks M + 1 entries.
RgbImage render_connectedness(const Semisegmentation& seg, const std::vector<Rgb>& palette = default_palette());

/// palette[label] for every pixel.
RgbImage render_labels(const LabelMap& labels, const std::vector<Rgb>& palette = default_palette());

}  // namespace fuzzyseg
