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

#include "fuzzyseg/mofs.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

Level quantize_level(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "strength " + std::to_string(v) + " outside [0, 1]");
  }
  // The small bias keeps decimal ties such as 0.9995 rounding up despite
  // their binary representation falling just below the tie.
  return static_cast<Level>(std::floor(v * kMaxLevel + 0.5 + 1e-9));
}

BucketQueue::BucketQueue() = default;

void BucketQueue::push(Level level, std::uint32_t spel) {
  if (level > cursor_) throw std::logic_error("bucket queue push above the cursor");
  buckets_[level].items.push_back(spel);
  ++size_;
}

bool BucketQueue::pop(Level& level, std::uint32_t& spel) {
  if (size_ == 0) return false;
  for (;;) {
    Bucket& b = buckets_[cursor_];
    if (b.head < b.items.size()) {
      level = cursor_;
      spel = b.items[b.head++];
      --size_;
      if (b.head == b.items.size()) {
        b.items.clear();
        b.head = 0;
      }
      return true;
    }
    --cursor_;
  }
}

Semisegmentation::Semisegmentation(int width, int height, int objects)
    : width_(width), height_(height), objects_(objects) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidConfig, "empty grid");
  if (objects < 1 || objects > kMaxObjects) {
    throw Error(ErrorCode::kInvalidConfig, "object count must lie in 1.." + std::to_string(kMaxObjects));
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  grades_.assign(n, 0);
  members_.assign(n, 0);
}

Level Semisegmentation::level(std::size_t i, int m) const {
  if (m == 0) return grades_[i];
  if (m < 1 || m > objects_) throw Error(ErrorCode::kBadObjectId, "no object " + std::to_string(m));
  return (members_[i] >> (m - 1)) & 1u ? grades_[i] : Level{0};
}

double Semisegmentation::sigma(int x, int y, int m) const {
  return level_value(level(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x), m));
}

void Semisegmentation::set(std::size_t i, Level grade, std::uint64_t members) {
  grades_[i] = grade;
  members_[i] = members;
}

bool Semisegmentation::is_segmentation() const {
  for (Level g : grades_) {
    if (g == 0) return false;
  }
  return true;
}

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

}  // namespace

Bytes Semisegmentation::serialize() const {
  Bytes out;
  out.reserve(12 + grades_.size() * 2 * (static_cast<std::size_t>(objects_) + 1));
  put_u32(out, static_cast<std::uint32_t>(width_));
  put_u32(out, static_cast<std::uint32_t>(height_));
  put_u32(out, static_cast<std::uint32_t>(objects_));
  for (std::size_t i = 0; i < grades_.size(); ++i) {
    for (int m = 0; m <= objects_; ++m) put_u16(out, level(i, m));
  }
  return out;
}

Semisegmentation Semisegmentation::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw Error(ErrorCode::kUnsupportedFormat, "semisegmentation header truncated");
  const std::uint32_t w = get_u32(bytes, 0);
  const std::uint32_t h = get_u32(bytes, 4);
  const std::uint32_t m = get_u32(bytes, 8);
  if (w == 0 || h == 0 || m == 0 || m > kMaxObjects || w > (1u << 16) || h > (1u << 16)) {
    throw Error(ErrorCode::kUnsupportedFormat, "semisegmentation header out of range");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 12 + n * 2 * (m + 1)) {
    throw Error(ErrorCode::kUnsupportedFormat, "semisegmentation payload has the wrong length");
  }
  Semisegmentation seg(static_cast<int>(w), static_cast<int>(h), static_cast<int>(m));
  std::size_t at = 12;
  for (std::size_t i = 0; i < n; ++i) {
    const Level grade = get_u16(bytes, at);
    at += 2;
    if (grade > kMaxLevel) throw Error(ErrorCode::kUnsupportedFormat, "grade above 1000");
    std::uint64_t members = 0;
    for (std::uint32_t k = 0; k < m; ++k, at += 2) {
      const Level v = get_u16(bytes, at);
      if (v == 0) continue;
      if (v != grade) throw Error(ErrorCode::kUnsupportedFormat, "membership differs from the grade");
      members |= std::uint64_t{1} << k;
    }
    if (grade > 0 && members == 0) throw Error(ErrorCode::kUnsupportedFormat, "positive grade without a member");
    seg.set(i, grade, members);
  }
  return seg;
}

Semisegmentation segment(int width, int height, const std::vector<std::vector<Spel>>& seed_sets,
                         const LinkStrength& link, const SegmentOptions& options) {
  if (seed_sets.empty()) throw Error(ErrorCode::kEmptySeeds, "no objects given");
  const int objects = static_cast<int>(seed_sets.size());
  Semisegmentation seg(width, height, objects);
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t n = seg.size();

  std::vector<Level> grade(n, 0);
  std::vector<std::uint64_t> members(n, 0);
  std::vector<std::uint64_t> expanded(n, 0);
  BucketQueue queue;

  for (int m = 1; m <= objects; ++m) {
    const auto& set = seed_sets[static_cast<std::size_t>(m - 1)];
    if (set.empty()) throw Error(ErrorCode::kEmptySeeds, "object " + std::to_string(m) + " has no seeds");
    for (const Spel& s : set) {
      if (s.x < 0 || s.y < 0 || s.x >= width || s.y >= height) {
        throw Error(ErrorCode::kOutOfRange, "seed (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                                ") of object " + std::to_string(m) + " lies outside the grid");
      }
      const std::size_t i = static_cast<std::size_t>(s.y) * w + static_cast<std::size_t>(s.x);
      const std::uint64_t bit = std::uint64_t{1} << (m - 1);
      if (members[i] & ~bit) {
        throw Error(ErrorCode::kConflictingSeeds, "spel (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                                      ") is a seed of two objects");
      }
      if (members[i] == 0) queue.push(kMaxLevel, static_cast<std::uint32_t>(i));
      grade[i] = kMaxLevel;
      members[i] |= bit;
    }
  }

  Level level = 0;
  std::uint32_t c = 0;
  while (queue.pop(level, c)) {
    if (level != grade[c]) continue;
    const std::uint64_t pending = members[c] & ~expanded[c];
    if (pending == 0) continue;
    expanded[c] |= pending;
    if (options.on_expand) options.on_expand(c, level);

    const std::size_t cx = c % w;
    const std::size_t neighbors[4] = {c - 1, c + 1, c - w, c + w};
    const bool valid[4] = {cx > 0, cx + 1 < w, c >= w, c + w < n};
    for (int k = 0; k < 4; ++k) {
      if (!valid[k]) continue;
      const std::size_t d = neighbors[k];
      if (grade[d] > level) continue;
      for (std::uint64_t rest = pending; rest != 0; rest &= rest - 1) {
        const int m = std::countr_zero(rest) + 1;
        const Level psi = quantize_level(link(m, c, d));
        const Level candidate = psi < level ? psi : level;
        if (candidate == 0) continue;
        const std::uint64_t bit = std::uint64_t{1} << (m - 1);
        if (candidate > grade[d]) {
          grade[d] = candidate;
          members[d] = bit;
          expanded[d] = 0;
          queue.push(candidate, static_cast<std::uint32_t>(d));
        } else if (candidate == grade[d] && !(members[d] & bit)) {
          members[d] |= bit;
          queue.push(candidate, static_cast<std::uint32_t>(d));
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) seg.set(i, grade[i], members[i]);
  return seg;
}

Semisegmentation segment(const GrayImage& img, const SeedSpec& seeds, const AffinityModel& model,
                         const SegmentOptions& options) {
  validate_seeds(seeds, img.width(), img.height());
  const SeedSpec sorted = normalized(seeds);
  if (model.object_count() != sorted.object_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "affinity model has " + std::to_string(model.object_count()) +
                                                   " objects, seeds have " + std::to_string(sorted.object_count()));
  }
  std::vector<std::vector<Spel>> sets;
  for (const ObjectSeeds& o : sorted.objects) sets.push_back(dilate8(o.points, img.width(), img.height()));
  const BoundAffinity bound(img, model);
  return segment(img.width(), img.height(), sets,
                 [&bound](int m, std::size_t c, std::size_t d) { return bound.value(m, c, d); }, options);
}

std::vector<double> connectedness_map(const Semisegmentation& seg, int m) {
  if (m < 1 || m > seg.object_count()) throw Error(ErrorCode::kBadObjectId, "no object " + std::to_string(m));
  std::vector<double> out(seg.size());
  for (std::size_t i = 0; i < seg.size(); ++i) out[i] = level_value(seg.level(i, m));
  return out;
}

GrayImage connectedness_image(const Semisegmentation& seg, int m) {
  return GrayImage(seg.width(), seg.height(), connectedness_map(seg, m));
}

LabelMap crisp_labels(const Semisegmentation& seg, const CrispOptions& options) {
  std::vector<int> labels(seg.size(), 0);
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (seg.grade(i) == 0) {
      if (options.allow_unsegmented) continue;
      const std::size_t w = static_cast<std::size_t>(seg.width());
      throw Error(ErrorCode::kUnsegmentedSpel, "spel (" + std::to_string(i % w) + "," + std::to_string(i / w) +
                                                   ") has grade 0");
    }
    labels[i] = std::countr_zero(seg.members(i)) + 1;
  }
  return LabelMap(seg.width(), seg.height(), std::move(labels));
}

}  // namespace fuzzyseg
