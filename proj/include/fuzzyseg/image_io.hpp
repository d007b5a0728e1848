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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fuzzyseg/image.hpp"

namespace fuzzyseg {

using Bytes = std::vector<std::uint8_t>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Packed 8-bit RGB raster used for rendered maps.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  const Rgb& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

// Decoding accepts PGM (P2/P5) and PNG with a single gray channel. Anything
// carrying color or alpha is rejected with UnsupportedFormat.
GrayImage decode_image(std::span<const std::uint8_t> bytes);
GrayImage load_image(const std::filesystem::path& path);

Bytes encode_png(const GrayImage& img);
Bytes encode_pgm(const GrayImage& img);
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

Bytes encode_rgb_png(const RgbImage& img);
void save_rgb_png(const RgbImage& img, const std::filesystem::path& path);

/// Palette PNG whose indices are the object ids.
Bytes encode_label_png(const LabelMap& labels);
void save_label_png(const LabelMap& labels, const std::filesystem::path& path);

/// Reads a palette PNG (index = id), or a grayscale PNG/PGM whose 8-bit
/// values are taken as ids.
LabelMap decode_label_map(std::span<const std::uint8_t> bytes);
LabelMap load_label_map(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Default object colors; index 0 is black (unlabeled).
const std::vector<Rgb>& default_palette();

}  // namespace fuzzyseg
