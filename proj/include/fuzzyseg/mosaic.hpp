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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/image.hpp"

namespace fuzzyseg {

/// Procedural texture used in place of photographed tiles.
struct SyntheticTexture {
  enum class Kind { kCosine, kStripes, kChecker, kNoise };

  Kind kind = Kind::kCosine;
  double period = 8.0;  // pixels per full cycle
  double mean = 0.5;
  double amplitude = 0.2;
  double noise = 0.05;  // std of additive Gaussian noise
  double angle_deg = 0.0;  // stripes only
  std::uint64_t seed = 0;
};

/// Renders the texture at the given size, clamped to [0, 1].
GrayImage synthesize(const SyntheticTexture& tex, int width, int height);

SyntheticTexture synthetic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticTexture& tex);

/// One rectangle of the mosaic. The tile is scaled by nearest neighbor and
/// repeated to fill width x height (which default to the scaled tile size).
struct Placement {
  std::optional<std::filesystem::path> tile_path;
  std::optional<SyntheticTexture> synthetic;
  int x = 0;
  int y = 0;
  double scale = 1.0;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<int> label;  // defaults to the placement's 1-based index
};

struct MosaicLayout {
  std::vector<Placement> placements;
};

/// Accepts a bare placement array or {"placements": [...]}. Relative tile
/// paths are resolved against `base_dir`.
MosaicLayout layout_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Loads every referenced tile file and renders every synthetic tile, in
/// placement order.
std::vector<GrayImage> load_tiles(const MosaicLayout& layout);

struct Mosaic {
  GrayImage image;
  LabelMap labels;
};

/// tiles[i] feeds placements[i]. The canvas is the bounding box of all
/// placements; uncovered pixels raise LayoutGap, doubly covered LayoutOverlap.
Mosaic compose_mosaic(const std::vector<GrayImage>& tiles, const MosaicLayout& layout);

}  // namespace fuzzyseg
