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
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fuzzyseg/affinity.hpp"
#include "fuzzyseg/image.hpp"
#include "fuzzyseg/image_io.hpp"
#include "fuzzyseg/seeds.hpp"

namespace fuzzyseg {

/// Strengths are stored as integers 0..1000 (three decimals).
using Level = std::uint16_t;
inline constexpr Level kMaxLevel = 1000;
inline constexpr int kMaxObjects = 64;

/// round(v * 1000), half-up. Throws OutOfRange outside [0, 1].
Level quantize_level(double v);
inline double level_value(Level l) { return static_cast<double>(l) / kMaxLevel; }
inline double quantize(double v) { return level_value(quantize_level(v)); }

/// Array of FIFO buckets, one per level, with a cursor that only moves down.
class BucketQueue {
 public:
  BucketQueue();

  /// Throws std::logic_error if `level` is above the cursor.
  void push(Level level, std::uint32_t spel);
  /// Pops the oldest entry of the highest non-empty bucket.
  bool pop(Level& level, std::uint32_t& spel);
  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }
  Level cursor() const { return cursor_; }

 private:
  struct Bucket {
    std::vector<std::uint32_t> items;
    std::size_t head = 0;
  };
  std::array<Bucket, kMaxLevel + 1> buckets_;
  Level cursor_ = kMaxLevel;
  std::size_t size_ = 0;
};

/// Per spel: grade sigma_0 and the set of objects m with sigma_m = sigma_0.
/// Every other sigma_m is 0 by construction.
class Semisegmentation {
 public:
  Semisegmentation() = default;
  Semisegmentation(int width, int height, int objects);

  int width() const { return width_; }
  int height() const { return height_; }
  int object_count() const { return objects_; }
  std::size_t size() const { return grades_.size(); }

  Level grade(std::size_t i) const { return grades_[i]; }
  std::uint64_t members(std::size_t i) const { return members_[i]; }
  /// sigma_m at spel i as a level; m = 0 gives the grade.
  Level level(std::size_t i, int m) const;
  double sigma(int x, int y, int m) const;

  void set(std::size_t i, Level grade, std::uint64_t members);

  /// True when every spel has a positive grade.
  bool is_segmentation() const;

  /// Little-endian: width, height, M as uint32, then M + 1 uint16 per spel.
  Bytes serialize() const;
  static Semisegmentation deserialize(std::span<const std::uint8_t> bytes);

  bool operator==(const Semisegmentation&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int objects_ = 0;
  std::vector<Level> grades_;
  std::vector<std::uint64_t> members_;
};

/// psi_m(c, d) for edge-adjacent row-major indices c and d, object m in 1..M.
using LinkStrength = std::function<double(int m, std::size_t c, std::size_t d)>;

struct SegmentOptions {
  /// Called each time a spel is expanded, with the level it was expanded at.
  std::function<void(std::size_t spel, Level level)> on_expand;
};

/// Engine entry point on an abstract grid. seed_sets[m - 1] is V_m (already
/// dilated). Sets must be non-empty, in bounds and pairwise disjoint.
Semisegmentation segment(int width, int height, const std::vector<std::vector<Spel>>& seed_sets,
                         const LinkStrength& link, const SegmentOptions& options = {});

Semisegmentation segment(const GrayImage& img, const SeedSpec& seeds, const AffinityModel& model,
                         const SegmentOptions& options = {});

/// sigma_m at every spel, row-major. Throws BadObjectId.
std::vector<double> connectedness_map(const Semisegmentation& seg, int m);
/// Same as a grayscale image, for PNG export.
GrayImage connectedness_image(const Semisegmentation& seg, int m);

struct CrispOptions {
  /// Label spels with sigma_0 = 0 as 0 instead of throwing UnsegmentedSpel.
  bool allow_unsegmented = false;
};

/// Lowest object id among the members of each spel.
LabelMap crisp_labels(const Semisegmentation& seg, const CrispOptions& options = {});

}  // namespace fuzzyseg
