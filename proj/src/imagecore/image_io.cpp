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

#include "fuzzyseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_pgm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5');
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

// Raw 8-bit raster straight out of the decoder.
struct Raster {
  int width = 0;
  int height = 0;
  int maxval = 255;
  bool palette = false;
  std::vector<std::uint16_t> values;
};

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void png_write_cb(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void png_flush_cb(png_structp) {}

void png_warn_cb(png_structp, png_const_charp) {}

Raster decode_png(std::span<const std::uint8_t> bytes, bool allow_palette) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn_cb);
  if (png == nullptr) throw Error(ErrorCode::kIoError, "cannot allocate PNG reader");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIoError, "cannot allocate PNG info");
  }
  Raster raster;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  // Only error flags are written after setjmp; C++ objects above outlive the jump.
  volatile int failure = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    if (failure == 2) throw Error(ErrorCode::kUnsupportedFormat, "PNG must be 8-bit single-channel gray");
    throw Error(ErrorCode::kIoError, "malformed PNG data");
  }
  png_set_read_fn(png, &cursor, png_read_cb);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  const bool gray = color == PNG_COLOR_TYPE_GRAY;
  const bool pal = color == PNG_COLOR_TYPE_PALETTE;
  if ((!gray && !(pal && allow_palette)) || depth > 8) {
    failure = 2;
    png_error(png, "unsupported");
  }
  if (gray && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (pal && depth < 8) png_set_packing(png);
  png_read_update_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.palette = pal;
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<std::size_t>(raster.height));
  rows.resize(static_cast<std::size_t>(raster.height));
  for (int y = 0; y < raster.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  raster.values.resize(static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height));
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      raster.values[static_cast<std::size_t>(y) * static_cast<std::size_t>(raster.width) + static_cast<std::size_t>(x)] =
          buffer[stride * static_cast<std::size_t>(y) + static_cast<std::size_t>(x)];
    }
  }
  return raster;
}

// PGM tokens: whitespace separated, '#' starts a comment to end of line.
class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::kIoError, "malformed PGM header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 30)) throw Error(ErrorCode::kIoError, "PGM value overflow");
    }
    return v;
  }
  // Exactly one whitespace byte separates the header from binary data.
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw Error(ErrorCode::kIoError, "malformed PGM header");
    ++pos_;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Raster decode_pgm(std::span<const std::uint8_t> bytes) {
  const bool ascii = bytes[1] == '2';
  PgmReader reader(bytes);
  reader.seek(2);
  Raster raster;
  raster.width = static_cast<int>(reader.next_int());
  raster.height = static_cast<int>(reader.next_int());
  raster.maxval = static_cast<int>(reader.next_int());
  if (raster.width <= 0 || raster.height <= 0 || raster.maxval <= 0 || raster.maxval > 65535) {
    throw Error(ErrorCode::kIoError, "invalid PGM header values");
  }
  const std::size_t n = static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height);
  raster.values.resize(n);
  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = reader.next_int();
      if (v > raster.maxval) throw Error(ErrorCode::kIoError, "PGM sample exceeds maxval");
      raster.values[i] = static_cast<std::uint16_t>(v);
    }
    return raster;
  }
  reader.skip_single_space();
  const std::size_t sample_bytes = raster.maxval > 255 ? 2 : 1;
  std::size_t p = reader.pos();
  if (bytes.size() < p + n * sample_bytes) throw Error(ErrorCode::kIoError, "truncated PGM data");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint16_t v = bytes[p++];
    if (sample_bytes == 2) v = static_cast<std::uint16_t>((v << 8) | bytes[p++]);
    if (v > raster.maxval) throw Error(ErrorCode::kIoError, "PGM sample exceeds maxval");
    raster.values[i] = v;
  }
  return raster;
}

Raster decode_raster(std::span<const std::uint8_t> bytes, bool allow_palette) {
  if (is_png(bytes)) return decode_png(bytes, allow_palette);
  if (is_pgm(bytes)) return decode_pgm(bytes);
  throw Error(ErrorCode::kUnsupportedFormat, "expected PGM (P2/P5) or PNG data");
}

// Holds every libpng call that may longjmp, so no C++ object is live across setjmp.
bool write_png_stream(png_structp png, png_infop info, Bytes* out, int width, int height, int color_type,
                      png_colorp colors, int color_count, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, out, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (color_count > 0) png_set_PLTE(png, info, colors, color_count);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

Bytes encode_png_raw(int width, int height, int color_type, int channels, std::span<const std::uint8_t> samples,
                     std::span<const Rgb> palette = {}) {
  std::vector<png_color> colors(palette.size());
  for (std::size_t i = 0; i < palette.size(); ++i) colors[i] = png_color{palette[i].r, palette[i].g, palette[i].b};
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(samples.data() + stride * static_cast<std::size_t>(y));
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn_cb);
  if (png == nullptr) throw Error(ErrorCode::kIoError, "cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIoError, "cannot allocate PNG info");
  }
  Bytes out;
  const bool ok = write_png_stream(png, info, &out, width, height, color_type, colors.data(),
                                   static_cast<int>(colors.size()), rows.data());
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(ErrorCode::kIoError, "PNG encoding failed");
  return out;
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  const Raster raster = decode_raster(bytes, false);
  std::vector<double> data(raster.values.size());
  const double maxval = raster.maxval;
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = raster.values[i] / maxval;
  return GrayImage(raster.width, raster.height, std::move(data));
}

GrayImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

Bytes encode_png(const GrayImage& img) {
  std::vector<std::uint8_t> samples(img.size());
  std::transform(img.data().begin(), img.data().end(), samples.begin(), to_byte);
  return encode_png_raw(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 1, samples);
}

Bytes encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.data()) out.push_back(to_byte(v));
  return out;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_png(img)); }
void save_pgm(const GrayImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_pgm(img)); }

Bytes encode_rgb_png(const RgbImage& img) {
  std::vector<std::uint8_t> samples;
  samples.reserve(img.pixels.size() * 3);
  for (const Rgb& p : img.pixels) {
    samples.push_back(p.r);
    samples.push_back(p.g);
    samples.push_back(p.b);
  }
  return encode_png_raw(img.width, img.height, PNG_COLOR_TYPE_RGB, 3, samples);
}

void save_rgb_png(const RgbImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_rgb_png(img));
}

Bytes encode_label_png(const LabelMap& labels) {
  const int max_label = labels.max_label();
  if (max_label > 255) throw Error(ErrorCode::kPaletteTooSmall, "label ids above 255 do not fit a PNG palette");
  std::vector<Rgb> palette = default_palette();
  palette.resize(static_cast<std::size_t>(std::max(max_label + 1, 1)));
  std::vector<std::uint8_t> samples(labels.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int v = labels.labels()[i];
    if (v < 0) throw Error(ErrorCode::kOutOfRange, "negative label id");
    samples[i] = static_cast<std::uint8_t>(v);
  }
  return encode_png_raw(labels.width(), labels.height(), PNG_COLOR_TYPE_PALETTE, 1, samples, palette);
}

void save_label_png(const LabelMap& labels, const std::filesystem::path& path) {
  write_file_atomic(path, encode_label_png(labels));
}

LabelMap decode_label_map(std::span<const std::uint8_t> bytes) {
  const Raster raster = decode_raster(bytes, true);
  std::vector<int> ids(raster.values.begin(), raster.values.end());
  return LabelMap(raster.width, raster.height, std::move(ids));
}

LabelMap load_label_map(const std::filesystem::path& path) { return decode_label_map(read_file(path)); }

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed for " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

const std::vector<Rgb>& default_palette() {
  static const std::vector<Rgb> palette = [] {
    std::vector<Rgb> p = {
        {0, 0, 0},       {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
        {245, 130, 48},  {145, 30, 180}, {70, 240, 240},  {240, 50, 230}, {210, 245, 60},
        {250, 190, 212}, {0, 128, 128},  {220, 190, 255}, {170, 110, 40}, {255, 250, 200},
        {128, 0, 0},     {170, 255, 195}, {128, 128, 0},  {255, 215, 180}, {0, 0, 128},
    };
    // Deterministic filler hues for large object counts.
    while (p.size() < 256) {
      const auto i = static_cast<unsigned>(p.size());
      p.push_back(Rgb{static_cast<std::uint8_t>(64 + (i * 97) % 192), static_cast<std::uint8_t>(64 + (i * 57) % 192),
                      static_cast<std::uint8_t>(64 + (i * 31) % 192)});
    }
    return p;
  }();
  return palette;
}

}  // namespace fuzzyseg
