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

#include "fuzzyseg/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/image_io.hpp"

namespace fuzzyseg {

namespace {

SyntheticTexture::Kind parse_kind(const std::string& s) {
  if (s == "cosine") return SyntheticTexture::Kind::kCosine;
  if (s == "stripes") return SyntheticTexture::Kind::kStripes;
  if (s == "checker") return SyntheticTexture::Kind::kChecker;
  if (s == "noise") return SyntheticTexture::Kind::kNoise;
  throw Error(ErrorCode::kInvalidConfig, "unknown synthetic texture '" + s + "'");
}

const char* kind_name(SyntheticTexture::Kind k) {
  switch (k) {
    case SyntheticTexture::Kind::kCosine: return "cosine";
    case SyntheticTexture::Kind::kStripes: return "stripes";
    case SyntheticTexture::Kind::kChecker: return "checker";
    case SyntheticTexture::Kind::kNoise: return "noise";
  }
  return "cosine";
}

int scaled_extent(int n, double scale) { return std::max(1, static_cast<int>(std::lround(n * scale))); }

}  // namespace

GrayImage synthesize(const SyntheticTexture& tex, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidConfig, "texture size must be positive");
  if (!(tex.period > 0.0) || !(tex.noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "texture period must be > 0 and noise >= 0");
  }
  std::mt19937_64 rng(tex.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double w = 2.0 * std::numbers::pi / tex.period;
  const double theta = tex.angle_deg * std::numbers::pi / 180.0;
  std::vector<double> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = tex.mean;
      switch (tex.kind) {
        case SyntheticTexture::Kind::kCosine:
          v += tex.amplitude * (std::cos(w * x) + std::cos(w * y));
          break;
        case SyntheticTexture::Kind::kStripes: {
          const double u = x * std::cos(theta) + y * std::sin(theta);
          v += std::cos(w * u) >= 0.0 ? tex.amplitude : -tex.amplitude;
          break;
        }
        case SyntheticTexture::Kind::kChecker: {
          const auto cell = [&](int t) { return static_cast<long>(std::floor(2.0 * t / tex.period)); };
          v += (cell(x) + cell(y)) % 2 == 0 ? tex.amplitude : -tex.amplitude;
          break;
        }
        case SyntheticTexture::Kind::kNoise:
          break;
      }
      if (tex.noise > 0.0) v += tex.noise * normal(rng);
      data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] =
          std::clamp(v, 0.0, 1.0);
    }
  }
  return GrayImage(width, height, std::move(data));
}

SyntheticTexture synthetic_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "synthetic texture must be a JSON object");
  SyntheticTexture t;
  try {
    if (j.contains("kind")) t.kind = parse_kind(j["kind"].get<std::string>());
    if (j.contains("period")) t.period = j["period"].get<double>();
    if (j.contains("mean")) t.mean = j["mean"].get<double>();
    if (j.contains("amplitude")) t.amplitude = j["amplitude"].get<double>();
    if (j.contains("noise")) t.noise = j["noise"].get<double>();
    if (j.contains("angle")) t.angle_deg = j["angle"].get<double>();
    if (j.contains("seed")) t.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("synthetic texture: ") + e.what());
  }
  return t;
}

nlohmann::json to_json(const SyntheticTexture& t) {
  return {{"kind", kind_name(t.kind)}, {"period", t.period}, {"mean", t.mean}, {"amplitude", t.amplitude},
          {"noise", t.noise}, {"angle", t.angle_deg}, {"seed", t.seed}};
}

MosaicLayout layout_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const nlohmann::json* list = &j;
  if (j.is_object() && j.contains("placements")) list = &j["placements"];
  if (!list->is_array() || list->empty()) {
    throw Error(ErrorCode::kInvalidConfig, "mosaic layout needs a non-empty placement list");
  }
  MosaicLayout layout;
  for (const auto& p : *list) {
    if (!p.is_object()) throw Error(ErrorCode::kInvalidConfig, "each placement must be a JSON object");
    Placement pl;
    try {
      if (p.contains("tile_path")) {
        std::filesystem::path path = p["tile_path"].get<std::string>();
        pl.tile_path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
      }
      if (p.contains("synthetic")) pl.synthetic = synthetic_from_json(p["synthetic"]);
      pl.x = p.value("x", 0);
      pl.y = p.value("y", 0);
      pl.scale = p.value("scale", 1.0);
      if (p.contains("width")) pl.width = p["width"].get<int>();
      if (p.contains("height")) pl.height = p["height"].get<int>();
      if (p.contains("label")) pl.label = p["label"].get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, std::string("mosaic placement: ") + e.what());
    }
    if (pl.tile_path.has_value() == pl.synthetic.has_value()) {
      throw Error(ErrorCode::kInvalidConfig, "each placement needs exactly one of tile_path or synthetic");
    }
    if (pl.synthetic && (!pl.width || !pl.height)) {
      throw Error(ErrorCode::kInvalidConfig, "synthetic placements need width and height");
    }
    if (!(pl.scale > 0.0) || pl.x < 0 || pl.y < 0 || (pl.width && *pl.width <= 0) || (pl.height && *pl.height <= 0) ||
        (pl.label && *pl.label < 1)) {
      throw Error(ErrorCode::kInvalidConfig, "placement needs x, y >= 0, scale > 0, positive size and label");
    }
    layout.placements.push_back(std::move(pl));
  }
  return layout;
}

std::vector<GrayImage> load_tiles(const MosaicLayout& layout) {
  std::vector<GrayImage> tiles;
  for (const Placement& p : layout.placements) {
    if (p.tile_path) {
      tiles.push_back(load_image(*p.tile_path));
    } else {
      // Rendered at source resolution so that `scale` acts as on a file tile.
      const int w = std::max(1, static_cast<int>(std::ceil(*p.width / p.scale)));
      const int h = std::max(1, static_cast<int>(std::ceil(*p.height / p.scale)));
      tiles.push_back(synthesize(*p.synthetic, w, h));
    }
  }
  return tiles;
}

Mosaic compose_mosaic(const std::vector<GrayImage>& tiles, const MosaicLayout& layout) {
  if (tiles.size() != layout.placements.size() || tiles.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "one tile per placement expected");
  }
  struct Region {
    int x0, y0, w, h;
  };
  std::vector<Region> regions;
  int width = 0;
  int height = 0;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const Placement& p = layout.placements[i];
    const int w = p.width.value_or(scaled_extent(tiles[i].width(), p.scale));
    const int h = p.height.value_or(scaled_extent(tiles[i].height(), p.scale));
    regions.push_back(Region{p.x, p.y, w, h});
    width = std::max(width, p.x + w);
    height = std::max(height, p.y + h);
  }
  std::vector<double> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  std::vector<int> labels(pixels.size(), 0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const Placement& p = layout.placements[i];
    const Region& r = regions[i];
    const GrayImage& t = tiles[i];
    const int label = p.label.value_or(static_cast<int>(i) + 1);
    for (int y = 0; y < r.h; ++y) {
      const int sy = static_cast<int>(std::floor(y / p.scale)) % t.height();
      for (int x = 0; x < r.w; ++x) {
        const std::size_t at = static_cast<std::size_t>(r.y0 + y) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(r.x0 + x);
        if (labels[at] != 0) {
          throw Error(ErrorCode::kLayoutOverlap, "placements " + std::to_string(i + 1) + " and an earlier one overlap at (" +
                                                     std::to_string(r.x0 + x) + "," + std::to_string(r.y0 + y) + ")");
        }
        const int sx = static_cast<int>(std::floor(x / p.scale)) % t.width();
        pixels[at] = t.at(sx, sy);
        labels[at] = label;
      }
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      const std::size_t w = static_cast<std::size_t>(width);
      throw Error(ErrorCode::kLayoutGap,
                  "pixel (" + std::to_string(i % w) + "," + std::to_string(i / w) + ") is not covered by any placement");
    }
  }
  return Mosaic{GrayImage(width, height, std::move(pixels)), LabelMap(width, height, std::move(labels))};
}

}  // namespace fuzzyseg
