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

#include "fuzzyseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  if (!(fill >= 0.0 && fill <= 1.0)) throw Error(ErrorCode::kOutOfRange, "intensity outside [0,1]");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kDimensionMismatch, "data length does not match width x height");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kOutOfRange, "intensity outside [0,1]");
  }
}

void GrayImage::set(int x, int y, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kOutOfRange, "intensity outside [0,1]");
  data_[index(x, y)] = v;
}

Rect clip(const Window& w, int width, int height) {
  Rect r{w.center.x - w.halfwidth, w.center.y - w.halfwidth, w.center.x + w.halfwidth,
         w.center.y + w.halfwidth};
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, width - 1);
  r.y1 = std::min(r.y1, height - 1);
  return r;
}

void Histogram::merge(const Histogram& other) {
  for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
  total_ += other.total_;
}

Distribution Histogram::normalized() const {
  Distribution p{};
  if (total_ == 0) return p;
  const double inv = 1.0 / static_cast<double>(total_);
  for (std::size_t i = 0; i < bins_.size(); ++i) p[i] = static_cast<double>(bins_[i]) * inv;
  return p;
}

Distribution Histogram::smoothed(double eps) const {
  Distribution p = normalized();
  double sum = 0.0;
  for (double& v : p) {
    v += eps;
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

PairStats rect_pair_stats(const GrayImage& img, Rect r) {
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, img.width() - 1);
  r.y1 = std::min(r.y1, img.height() - 1);
  if (r.area() < 2) throw Error(ErrorCode::kEmptyWindow, "window holds fewer than 2 pixels");

  // Two passes keep the variance free of cancellation for near-constant windows.
  double sum = 0.0;
  std::size_t count = 0;
  auto visit = [&](auto&& fn) {
    for (int y = r.y0; y <= r.y1; ++y) {
      for (int x = r.x0; x <= r.x1; ++x) {
        const double v = img.at(x, y);
        if (x < r.x1) fn(0.5 * (v + img.at(x + 1, y)));
        if (y < r.y1) fn(0.5 * (v + img.at(x, y + 1)));
      }
    }
  };
  visit([&](double g) {
    sum += g;
    ++count;
  });
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  visit([&](double g) { ss += (g - mean) * (g - mean); });
  return PairStats{mean, std::sqrt(ss / static_cast<double>(count))};
}

PairStats window_stats(const GrayImage& img, const Window& w) {
  return rect_pair_stats(img, clip(w, img.width(), img.height()));
}

Histogram rect_histogram(const GrayImage& img, Rect r) {
  Histogram h;
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, img.width() - 1);
  r.y1 = std::min(r.y1, img.height() - 1);
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) h.add(intensity_bin(img.at(x, y)));
  }
  return h;
}

Histogram window_histogram(const GrayImage& img, const Window& w) {
  return rect_histogram(img, clip(w, img.width(), img.height()));
}

PatchGrid make_patch_grid(const GrayImage& img, int patch_px) {
  if (patch_px < 2) throw Error(ErrorCode::kInvalidConfig, "patch size must be at least 2 pixels");
  if (patch_px > std::min(img.width(), img.height())) {
    throw Error(ErrorCode::kPatchTooLarge, "patch size " + std::to_string(patch_px) +
                                               " exceeds the smaller image dimension");
  }
  PatchGrid grid;
  grid.image_width = img.width();
  grid.image_height = img.height();
  grid.patch_px = patch_px;
  grid.cols = (img.width() + patch_px - 1) / patch_px;
  grid.rows = (img.height() + patch_px - 1) / patch_px;
  grid.patches.reserve(static_cast<std::size_t>(grid.cols) * static_cast<std::size_t>(grid.rows));
  for (int gy = 0; gy < grid.rows; ++gy) {
    for (int gx = 0; gx < grid.cols; ++gx) {
      Patch p;
      p.index = grid.patches.size();
      p.rect = Rect{gx * patch_px, gy * patch_px, std::min((gx + 1) * patch_px, img.width()) - 1,
                    std::min((gy + 1) * patch_px, img.height()) - 1};
      p.histogram = rect_histogram(img, p.rect);
      // Mean of consecutive integers.
      p.center_x = 0.5 * (p.rect.x0 + p.rect.x1);
      p.center_y = 0.5 * (p.rect.y0 + p.rect.y1);
      grid.patches.push_back(std::move(p));
    }
  }
  return grid;
}

LabelMap::LabelMap(int width, int height, int fill) : width_(width), height_(height) {
  check_dims(width, height);
  labels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

LabelMap::LabelMap(int width, int height, std::vector<int> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  check_dims(width, height);
  if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kDimensionMismatch, "label count does not match width x height");
  }
}

int LabelMap::max_label() const {
  return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
}

}  // namespace fuzzyseg
