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

#include <bit>
#include <cmath>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/evalbench.hpp"

namespace fuzzyseg {

namespace {

std::uint8_t scale_channel(std::uint8_t c, Level grade) {
  return static_cast<std::uint8_t>((static_cast<unsigned>(c) * grade + kMaxLevel / 2) / kMaxLevel);
}

}  // namespace

RgbImage render_connectedness(const Semisegmentation& seg, const std::vector<Rgb>& palette) {
  if (palette.size() < static_cast<std::size_t>(seg.object_count()) + 1) {
    throw Error(ErrorCode::kPaletteTooSmall, "palette has " + std::to_string(palette.size()) + " colors, need " +
                                                 std::to_string(seg.object_count() + 1));
  }
  RgbImage out;
  out.width = seg.width();
  out.height = seg.height();
  out.pixels.resize(seg.size());
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const Level g = seg.grade(i);
    if (g == 0) {
      out.pixels[i] = palette[0];
      continue;
    }
    const Rgb& c = palette[static_cast<std::size_t>(std::countr_zero(seg.members(i)) + 1)];
    out.pixels[i] = Rgb{scale_channel(c.r, g), scale_channel(c.g, g), scale_channel(c.b, g)};
  }
  return out;
}

RgbImage render_labels(const LabelMap& labels, const std::vector<Rgb>& palette) {
  RgbImage out;
  out.width = labels.width();
  out.height = labels.height();
  out.pixels.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int v = labels.labels()[i];
    if (v < 0 || static_cast<std::size_t>(v) >= palette.size()) {
      throw Error(ErrorCode::kPaletteTooSmall, "no palette entry for label " + std::to_string(v));
    }
    out.pixels[i] = palette[static_cast<std::size_t>(v)];
  }
  return out;
}

}  // namespace fuzzyseg
