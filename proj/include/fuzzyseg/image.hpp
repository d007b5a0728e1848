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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fuzzyseg {

inline constexpr int kHistogramBins = 256;

/// A pixel position. x is the column, y the row.
struct Spel {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Spel&, const Spel&) = default;
  friend constexpr auto operator<=>(const Spel&, const Spel&) = default;
};

/// Inclusive pixel rectangle [x0, x1] x [y0, y1].
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool empty() const { return x1 < x0 || y1 < y0; }
  std::size_t area() const {
    return empty() ? 0 : static_cast<std::size_t>(width()) * static_cast<std::size_t>(height());
  }
  bool contains(Spel s) const { return s.x >= x0 && s.x <= x1 && s.y >= y0 && s.y <= y1; }
};

/// Square neighborhood of side 2 * halfwidth + 1 centered on a spel.
struct Window {
  Spel center;
  int halfwidth = 1;

  int side() const { return 2 * halfwidth + 1; }
  static Window with_side(Spel center, int side) { return Window{center, side / 2}; }
};

/// Row-major grayscale image with intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(int x, int y) const { return data_[index(x, y)]; }
  double at(Spel s) const { return at(s.x, s.y); }
  void set(int x, int y, double v);

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  bool contains(Spel s) const { return s.x >= 0 && s.y >= 0 && s.x < width_ && s.y < height_; }
  Rect bounds() const { return Rect{0, 0, width_ - 1, height_ - 1}; }

  std::span<const double> data() const { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Intersection of a window with the image.
Rect clip(const Window& w, int width, int height);

/// Quantize an intensity in [0, 1] to its 8-bit histogram bin.
inline int intensity_bin(double v) {
  const double scaled = v * 255.0 + 0.5;
  const int bin = static_cast<int>(scaled);
  return bin < 0 ? 0 : (bin > 255 ? 255 : bin);
}

class Histogram {
 public:
  Histogram() { bins_.fill(0); }

  void add(int bin, std::uint32_t count = 1) {
    bins_[static_cast<std::size_t>(bin)] += count;
    total_ += count;
  }
  void remove(int bin, std::uint32_t count = 1) {
    bins_[static_cast<std::size_t>(bin)] -= count;
    total_ -= count;
  }
  void merge(const Histogram& other);

  std::uint32_t operator[](int bin) const { return bins_[static_cast<std::size_t>(bin)]; }
  std::uint64_t total() const { return total_; }
  const std::array<std::uint32_t, kHistogramBins>& bins() const { return bins_; }

  /// Probability masses; all zeros when the histogram is empty.
  std::array<double, kHistogramBins> normalized() const;

  /// Add `eps` to every bin's probability and renormalize. Never has zeros.
  std::array<double, kHistogramBins> smoothed(double eps) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::array<std::uint32_t, kHistogramBins> bins_{};
  std::uint64_t total_ = 0;
};

using Distribution = std::array<double, kHistogramBins>;

struct PairStats {
  double mean_pairs = 0.0;
  double std_pairs = 0.0;
};

/// Mean and population standard deviation of the average brightness over every
/// edge-adjacent pixel pair lying inside the clipped window.
PairStats window_stats(const GrayImage& img, const Window& w);

/// Same statistic over an arbitrary rectangle (clipped to the image).
PairStats rect_pair_stats(const GrayImage& img, Rect r);

Histogram window_histogram(const GrayImage& img, const Window& w);
Histogram rect_histogram(const GrayImage& img, Rect r);

struct Patch {
  std::size_t index = 0;
  Rect rect;
  Histogram histogram;
  double center_x = 0.0;  // mean pixel column
  double center_y = 0.0;  // mean pixel row
};

struct PatchGrid {
  int image_width = 0;
  int image_height = 0;
  int patch_px = 0;
  int cols = 0;
  int rows = 0;
  std::vector<Patch> patches;  // row-major over the grid
};

PatchGrid make_patch_grid(const GrayImage& img, int patch_px);

/// Per-pixel object ids; 0 means unlabeled.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, int fill = 0);
  LabelMap(int width, int height, std::vector<int> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  int at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, int label) { labels_[index(x, y)] = label; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  std::span<const int> labels() const { return labels_; }
  std::span<int> labels() { return labels_; }
  int max_label() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<int> labels_;
};

}  // namespace fuzzyseg
