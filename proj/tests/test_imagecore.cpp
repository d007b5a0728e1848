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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "fuzzyseg/image.hpp"
#include "fuzzyseg/image_io.hpp"
#include "fuzzyseg/mosaic.hpp"
#include "test_util.hpp"

using namespace fuzzyseg;

namespace {

Bytes as_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

// Mean and population std of pair averages, enumerating pairs directly.
PairStats brute_pair_stats(const GrayImage& img, Rect r) {
  std::vector<double> avgs;
  for (int y = r.y0; y <= r.y1; ++y) {
    for (int x = r.x0; x <= r.x1; ++x) {
      if (x + 1 <= r.x1) avgs.push_back(0.5 * (img.at(x, y) + img.at(x + 1, y)));
      if (y + 1 <= r.y1) avgs.push_back(0.5 * (img.at(x, y) + img.at(x, y + 1)));
    }
  }
  const double mean = std::accumulate(avgs.begin(), avgs.end(), 0.0) / static_cast<double>(avgs.size());
  double ss = 0.0;
  for (double a : avgs) ss += (a - mean) * (a - mean);
  return PairStats{mean, std::sqrt(ss / static_cast<double>(avgs.size()))};
}

}  // namespace

TEST_CASE("image rejects intensities outside [0, 1]") {
  CHECK_ERROR(GrayImage(2, 2, 1.5), ErrorCode::kOutOfRange);
  CHECK_ERROR(GrayImage(1, 2, std::vector<double>{0.0, -0.1}), ErrorCode::kOutOfRange);
  CHECK_ERROR(GrayImage(2, 2, std::vector<double>{0.0}), ErrorCode::kDimensionMismatch);
}

TEST_CASE("ascii PGM scales to [0, 1]") {
  const GrayImage img = decode_image(as_bytes("P2\n# comment\n2 2\n255\n0 255\n0 255\n"));
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  const std::vector<double> want{0, 1, 0, 1};
  CHECK(std::equal(img.data().begin(), img.data().end(), want.begin()));
}

TEST_CASE("binary PGM with 16-bit samples") {
  std::string s = "P5 2 1 65535\n";
  s += std::string{'\xff', '\xff', '\x00', '\x00'};
  const GrayImage img = decode_image(as_bytes(s));
  CHECK(img.at(0, 0) == 1.0);
  CHECK(img.at(1, 0) == 0.0);
}

TEST_CASE("8-bit round trip through PNG and PGM") {
  std::mt19937_64 rng(1);
  std::vector<double> v(37 * 23);
  std::uniform_int_distribution<int> byte(0, 255);
  for (double& x : v) x = byte(rng) / 255.0;
  const GrayImage img(37, 23, v);
  CHECK(decode_image(encode_png(img)) == img);
  CHECK(decode_image(encode_pgm(img)) == img);
}

TEST_CASE("unsupported inputs") {
  RgbImage rgb;
  rgb.width = 2;
  rgb.height = 1;
  rgb.pixels = {Rgb{1, 2, 3}, Rgb{4, 5, 6}};
  CHECK_ERROR(decode_image(encode_rgb_png(rgb)), ErrorCode::kUnsupportedFormat);
  CHECK_ERROR(decode_image(as_bytes("GIF89a")), ErrorCode::kUnsupportedFormat);
  CHECK_ERROR(decode_image(as_bytes("P5 4 4 255\n\x01")), ErrorCode::kIoError);
  CHECK_ERROR(load_image("/nonexistent/image.png"), ErrorCode::kIoError);
}

TEST_CASE("label maps survive the palette PNG") {
  LabelMap labels(5, 3, std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 255});
  CHECK(decode_label_map(encode_label_png(labels)) == labels);
  CHECK(labels.max_label() == 255);
}

TEST_CASE("atomic writes leave only the target") {
  const auto dir = testutil::temp_dir("atomic");
  write_text_atomic(dir / "a.txt", "hello");
  const Bytes back = read_file(dir / "a.txt");
  CHECK(std::string(back.begin(), back.end()) == "hello");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("intensity bins round to the nearest level") {
  CHECK(intensity_bin(0.0) == 0);
  CHECK(intensity_bin(1.0) == 255);
  CHECK(intensity_bin(0.5) == 128);
  CHECK(intensity_bin(1.0 / 255.0) == 1);
}

TEST_CASE("window statistics") {
  SUBCASE("constant field") {
    const GrayImage img(9, 9, 0.5);
    const PairStats s = window_stats(img, Window{{4, 4}, 2});
    CHECK(s.mean_pairs == doctest::Approx(0.5));
    CHECK(s.std_pairs == doctest::Approx(0.0));
  }
  SUBCASE("single pair") {
    const GrayImage img(2, 1, std::vector<double>{0.0, 1.0});
    const PairStats s = window_stats(img, Window{{0, 0}, 1});
    CHECK(s.mean_pairs == doctest::Approx(0.5));
    CHECK(s.std_pairs == doctest::Approx(0.0));
  }
  SUBCASE("3x3 checkerboard") {
    std::vector<double> v(9);
    for (int i = 0; i < 9; ++i) v[static_cast<std::size_t>(i)] = ((i % 3) + (i / 3)) % 2;
    const GrayImage img(3, 3, v);
    const PairStats s = window_stats(img, Window{{1, 1}, 1});
    const PairStats oracle = brute_pair_stats(img, img.bounds());
    CHECK(s.mean_pairs == doctest::Approx(0.5));
    CHECK(s.std_pairs == doctest::Approx(0.0));
    CHECK(s.mean_pairs == doctest::Approx(oracle.mean_pairs).epsilon(1e-12));
  }
  SUBCASE("fewer than two pixels") {
    const GrayImage img(1, 1, 0.3);
    CHECK_ERROR(window_stats(img, Window{{0, 0}, 3}), ErrorCode::kEmptyWindow);
  }
  SUBCASE("matches pair enumeration at every position") {
    std::mt19937_64 rng(7);
    const GrayImage img = testutil::random_image(11, 8, rng);
    for (int hw = 1; hw <= 3; ++hw) {
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          const Window w{{x, y}, hw};
          const PairStats a = window_stats(img, w);
          const PairStats b = brute_pair_stats(img, clip(w, img.width(), img.height()));
          CHECK(a.mean_pairs == doctest::Approx(b.mean_pairs).epsilon(1e-12));
          CHECK(a.std_pairs == doctest::Approx(b.std_pairs).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("window statistics are translation invariant") {
  std::mt19937_64 rng(3);
  const GrayImage small = testutil::random_image(7, 7, rng);
  std::vector<double> big(20 * 20, 0.0);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) big[static_cast<std::size_t>((y + 5) * 20 + x + 9)] = small.at(x, y);
  }
  const GrayImage shifted(20, 20, big);
  const PairStats a = window_stats(small, Window{{3, 3}, 3});
  const PairStats b = window_stats(shifted, Window{{12, 8}, 3});
  CHECK(a.mean_pairs == doctest::Approx(b.mean_pairs).epsilon(1e-12));
  CHECK(a.std_pairs == doctest::Approx(b.std_pairs).epsilon(1e-12));
}

TEST_CASE("histogram totals equal clipped window areas") {
  std::mt19937_64 rng(5);
  const GrayImage img = testutil::random_image(9, 6, rng);
  for (int hw : {1, 2, 7}) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const Window w{{x, y}, hw};
        CHECK(window_histogram(img, w).total() == clip(w, img.width(), img.height()).area());
      }
    }
  }
}

TEST_CASE("histogram normalization and smoothing") {
  Histogram h;
  h.add(3, 3);
  h.add(200, 1);
  const Distribution p = h.normalized();
  CHECK(p[3] == doctest::Approx(0.75));
  CHECK(p[200] == doctest::Approx(0.25));
  const Distribution s = h.smoothed(1.0 / 256);
  CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*std::min_element(s.begin(), s.end()) > 0.0);
  CHECK(s[3] == doctest::Approx((0.75 + 1.0 / 256) / 2.0));
  h.remove(3, 3);
  CHECK(h.total() == 1);
}

TEST_CASE("patch grid") {
  SUBCASE("two patches with pixel-mean centers") {
    const PatchGrid g = make_patch_grid(GrayImage(40, 20, 0.1), 20);
    REQUIRE(g.patches.size() == 2);
    CHECK(g.patches[0].center_x == 9.5);
    CHECK(g.patches[0].center_y == 9.5);
    CHECK(g.patches[1].center_x == 29.5);
    CHECK(g.patches[1].center_y == 9.5);
  }
  SUBCASE("edge patches are truncated") {
    const PatchGrid g = make_patch_grid(GrayImage(45, 20, 0.1), 20);
    REQUIRE(g.patches.size() == 3);
    CHECK(g.patches[2].rect.width() == 5);
    CHECK(g.patches[2].histogram.total() == 100);
  }
  SUBCASE("paper-scale grid") {
    const PatchGrid g = make_patch_grid(GrayImage(1280, 1280, 0.2), 20);
    CHECK(g.cols == 64);
    CHECK(g.rows == 64);
    CHECK(g.patches.size() == 4096);
  }
  SUBCASE("patches tile the image exactly") {
    const GrayImage img(53, 31, 0.4);
    const PatchGrid g = make_patch_grid(img, 8);
    std::vector<int> cover(img.size(), 0);
    std::size_t total = 0;
    for (const Patch& p : g.patches) {
      total += p.histogram.total();
      for (int y = p.rect.y0; y <= p.rect.y1; ++y) {
        for (int x = p.rect.x0; x <= p.rect.x1; ++x) ++cover[img.index(x, y)];
      }
    }
    CHECK(total == img.size());
    CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
  }
  SUBCASE("errors") {
    CHECK_ERROR(make_patch_grid(GrayImage(10, 10, 0.0), 11), ErrorCode::kPatchTooLarge);
    CHECK_ERROR(make_patch_grid(GrayImage(10, 10, 0.0), 1), ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("mosaic composition") {
  const GrayImage a(64, 64, 0.2);
  const GrayImage b(64, 64, 0.8);
  SUBCASE("side by side") {
    MosaicLayout layout;
    layout.placements.resize(2);
    layout.placements[1].x = 64;
    const Mosaic m = compose_mosaic({a, b}, layout);
    CHECK(m.image.width() == 128);
    CHECK(m.image.height() == 64);
    CHECK(m.labels.at(0, 0) == 1);
    CHECK(m.labels.at(127, 63) == 2);
    CHECK(m.image.at(100, 10) == 0.8);
    CHECK(m.labels.max_label() == 2);
  }
  SUBCASE("single tile") {
    MosaicLayout layout;
    layout.placements.resize(1);
    const Mosaic m = compose_mosaic({a}, layout);
    CHECK(std::all_of(m.labels.labels().begin(), m.labels.labels().end(), [](int v) { return v == 1; }));
  }
  SUBCASE("five-texture layout") {
    const auto layout = layout_from_json(nlohmann::json::parse(R"([
      {"synthetic": {"kind": "noise", "mean": 0.2}, "x": 0, "y": 0, "width": 40, "height": 20},
      {"synthetic": {"kind": "noise", "mean": 0.4}, "x": 40, "y": 0, "width": 40, "height": 20},
      {"synthetic": {"kind": "noise", "mean": 0.6}, "x": 0, "y": 20, "width": 20, "height": 20},
      {"synthetic": {"kind": "noise", "mean": 0.7}, "x": 20, "y": 20, "width": 30, "height": 20},
      {"synthetic": {"kind": "noise", "mean": 0.9}, "x": 50, "y": 20, "width": 30, "height": 20}
    ])"));
    const Mosaic m = compose_mosaic(load_tiles(layout), layout);
    std::set<int> seen(m.labels.labels().begin(), m.labels.labels().end());
    CHECK(seen == std::set<int>{1, 2, 3, 4, 5});
  }
  SUBCASE("scaling and wrap-around") {
    const GrayImage t(2, 1, std::vector<double>{0.0, 1.0});
    MosaicLayout layout;
    layout.placements.resize(1);
    layout.placements[0].scale = 2.0;
    layout.placements[0].width = 10;
    layout.placements[0].height = 1;
    const Mosaic m = compose_mosaic({t}, layout);
    const std::vector<double> want{0, 0, 1, 1, 0, 0, 1, 1, 0, 0};
    CHECK(std::equal(m.image.data().begin(), m.image.data().end(), want.begin()));
  }
  SUBCASE("gap and overlap") {
    MosaicLayout gap;
    gap.placements.resize(2);
    gap.placements[1].x = 70;
    CHECK_ERROR(compose_mosaic({a, b}, gap), ErrorCode::kLayoutGap);
    MosaicLayout overlap;
    overlap.placements.resize(2);
    overlap.placements[1].x = 32;
    CHECK_ERROR(compose_mosaic({a, b}, overlap), ErrorCode::kLayoutOverlap);
  }
  SUBCASE("explicit labels may repeat") {
    MosaicLayout layout;
    layout.placements.resize(3);
    layout.placements[1].x = 64;
    layout.placements[2].x = 128;
    layout.placements[2].label = 1;
    const Mosaic m = compose_mosaic({a, b, a}, layout);
    CHECK(m.labels.at(130, 5) == 1);
    CHECK(m.labels.max_label() == 2);
  }
}

TEST_CASE("synthetic textures are deterministic and in range") {
  SyntheticTexture t;
  t.kind = SyntheticTexture::Kind::kChecker;
  t.period = 4;
  t.noise = 0.3;
  t.seed = 11;
  const GrayImage x = synthesize(t, 33, 17);
  const GrayImage y = synthesize(t, 33, 17);
  CHECK(x == y);
  CHECK(std::all_of(x.data().begin(), x.data().end(), [](double v) { return v >= 0.0 && v <= 1.0; }));
  t.noise = 0.0;
  const GrayImage clean = synthesize(t, 8, 1);
  CHECK(clean.at(0, 0) == doctest::Approx(0.7));
  CHECK(clean.at(2, 0) == doctest::Approx(0.3));
  CHECK(clean.at(4, 0) == doctest::Approx(0.7));
}

TEST_CASE("layout JSON errors") {
  CHECK_ERROR(layout_from_json(nlohmann::json::array()), ErrorCode::kInvalidConfig);
  CHECK_ERROR(layout_from_json(nlohmann::json::parse(R"([{"x": 0}])")), ErrorCode::kInvalidConfig);
  CHECK_ERROR(layout_from_json(nlohmann::json::parse(R"([{"synthetic": {"kind": "plaid"}, "width": 4, "height": 4}])")),
              ErrorCode::kInvalidConfig);
  const auto layout = layout_from_json(nlohmann::json::parse(R"([{"tile_path": "missing.pgm"}])"), "/nonexistent");
  CHECK_ERROR(load_tiles(layout), ErrorCode::kIoError);
}
