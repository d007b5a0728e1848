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

#include <httplib.h>

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "fuzzyseg/image_io.hpp"
#include "fuzzyseg/mosaic.hpp"
#include "fuzzyseg/service.hpp"
#include "test_util.hpp"

using namespace fuzzyseg;
using nlohmann::json;

namespace {

std::string as_string(const Bytes& b) { return std::string(b.begin(), b.end()); }

Bytes base64_decode(const std::string& in) {
  static const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  Bytes out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    const auto pos = alphabet.find(c);
    if (pos == std::string::npos) continue;
    acc = (acc << 6) | static_cast<std::uint32_t>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> bits));
    }
  }
  return out;
}

std::string two_texture_png(int w = 80, int h = 60) {
  MosaicLayout layout;
  layout.placements.resize(2);
  SyntheticTexture a;
  a.kind = SyntheticTexture::Kind::kNoise;
  a.mean = 0.25;
  a.seed = 1;
  SyntheticTexture b = a;
  b.mean = 0.75;
  b.seed = 2;
  layout.placements[0].synthetic = a;
  layout.placements[0].width = w / 2;
  layout.placements[0].height = h;
  layout.placements[1].synthetic = b;
  layout.placements[1].x = w / 2;
  layout.placements[1].width = w - w / 2;
  layout.placements[1].height = h;
  return as_string(encode_png(compose_mosaic(load_tiles(layout), layout).image));
}

const char* kSeeds = R"({"seeds": {"objects": [{"id": 1, "points": [[10, 20], [12, 40]]},
                                                {"id": 2, "points": [[60, 20], [62, 40]]}]}})";

struct Fixture {
  std::unique_ptr<Service> service;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;

  explicit Fixture(ServiceOptions options = {}) {
    options.port = 0;
    service = std::make_unique<Service>(options);
    const int port = service->bind();
    REQUIRE(port > 0);
    thread = std::thread([this] { service->listen(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(60, 0);
    for (int i = 0; i < 100; ++i) {
      if (auto r = client->Get("/healthz"); r && r->status == 200) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  ~Fixture() {
    service->stop();
    thread.join();
  }

  httplib::Result upload(const std::string& body, const std::string& id = "") {
    const std::string path = id.empty() ? "/sessions" : "/sessions?id=" + id;
    return client->Post(path, body, "application/octet-stream");
  }

  httplib::Result post_json(const std::string& path, const std::string& body) {
    return client->Post(path, body, "application/json");
  }

  json wait_done(const std::string& id) {
    for (int i = 0; i < 6000; ++i) {
      auto r = client->Get("/sessions/" + id + "/status");
      REQUIRE(r);
      const json j = json::parse(r->body);
      if (j["status"] != "running") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("job did not finish");
    return {};
  }
};

}  // namespace

TEST_CASE("health and CORS") {
  Fixture f;
  auto r = f.client->Get("/healthz");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  auto pre = f.client->Options("/sessions");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(!pre->get_header_value("Access-Control-Allow-Methods").empty());
}

TEST_CASE("uploads") {
  ServiceOptions options;
  options.max_pixels = 100 * 100;
  Fixture f(options);
  SUBCASE("valid PNG") {
    auto r = f.upload(two_texture_png());
    REQUIRE(r);
    CHECK(r->status == 201);
    const json j = json::parse(r->body);
    CHECK(!j["id"].get<std::string>().empty());
    CHECK(j["width"] == 80);
    auto info = f.client->Get("/sessions/" + j["id"].get<std::string>());
    REQUIRE(info);
    CHECK(json::parse(info->body)["status"] == "idle");
    auto img = f.client->Get("/sessions/" + j["id"].get<std::string>() + "/image");
    REQUIRE(img);
    CHECK(decode_image(Bytes(img->body.begin(), img->body.end())).width() == 80);
  }
  SUBCASE("RGB PNG is rejected") {
    RgbImage rgb;
    rgb.width = 2;
    rgb.height = 2;
    rgb.pixels.assign(4, Rgb{10, 20, 30});
    auto r = f.upload(as_string(encode_rgb_png(rgb)));
    REQUIRE(r);
    CHECK(r->status == 400);
  }
  SUBCASE("duplicate id") {
    auto first = f.upload(two_texture_png(), "dup");
    REQUIRE(first);
    CHECK(first->status == 201);
    auto second = f.upload(two_texture_png(), "dup");
    REQUIRE(second);
    CHECK(second->status == 409);
    auto bad = f.upload(two_texture_png(), "no%20spaces");
    REQUIRE(bad);
    CHECK(bad->status == 400);
  }
  SUBCASE("too large") {
    auto r = f.upload(two_texture_png(120, 100));
    REQUIRE(r);
    CHECK(r->status == 413);
  }
  SUBCASE("unknown session") {
    auto r = f.client->Get("/sessions/nobody/status");
    REQUIRE(r);
    CHECK(r->status == 404);
  }
}

TEST_CASE("segment, rerun, and fetch results by revision") {
  Fixture f;
  REQUIRE(f.upload(two_texture_png(), "s1")->status == 201);

  auto r0 = f.post_json("/sessions/s1/segment", kSeeds);
  REQUIRE(r0);
  CHECK(r0->status == 202);
  CHECK(json::parse(r0->body)["revision"] == 0);
  CHECK(f.wait_done("s1")["status"] == "done");

  auto res0 = f.client->Get("/sessions/s1/result?rev=0");
  REQUIRE(res0);
  REQUIRE(res0->status == 200);
  const json b0 = json::parse(res0->body);
  CHECK(b0["objects"] == 2);
  CHECK(b0["connectedness_png"].size() == 2);
  CHECK(b0["scales"].size() == 2);
  CHECK(b0["timing"].contains("seconds"));
  const LabelMap labels = decode_label_map(base64_decode(b0["crisp_png"].get<std::string>()));
  CHECK(labels.at(5, 5) == 1);
  CHECK(labels.at(75, 55) == 2);

  json more = json::parse(kSeeds);
  more["seeds"]["objects"][0]["points"].push_back({20, 50});
  auto r1 = f.post_json("/sessions/s1/segment", more.dump());
  REQUIRE(r1);
  CHECK(r1->status == 202);
  CHECK(json::parse(r1->body)["revision"] == 1);
  const json st = f.wait_done("s1");
  CHECK(st["revisions"] == 2);
  CHECK(st["latest"] == 1);

  auto again0 = f.client->Get("/sessions/s1/result?rev=0");
  REQUIRE(again0);
  CHECK(again0->status == 200);
  CHECK(json::parse(again0->body)["seeds"] == b0["seeds"]);
  auto latest = f.client->Get("/sessions/s1/result");
  REQUIRE(latest);
  CHECK(json::parse(latest->body)["revision"] == 1);
  auto beyond = f.client->Get("/sessions/s1/result?rev=2");
  REQUIRE(beyond);
  CHECK(beyond->status == 404);

  auto hist = f.client->Get("/sessions/s1/revisions");
  REQUIRE(hist);
  const json h = json::parse(hist->body);
  REQUIRE(h["revisions"].size() == 2);
  CHECK(h["revisions"][1]["seeds"]["objects"][0]["points"].size() == 3);
}

TEST_CASE("identical inputs give identical bundles across sessions") {
  Fixture f;
  REQUIRE(f.upload(two_texture_png(), "a")->status == 201);
  REQUIRE(f.upload(two_texture_png(), "b")->status == 201);
  REQUIRE(f.post_json("/sessions/a/segment", kSeeds)->status == 202);
  f.wait_done("a");
  REQUIRE(f.post_json("/sessions/b/segment", kSeeds)->status == 202);
  f.wait_done("b");
  json a = json::parse(f.client->Get("/sessions/a/result")->body);
  json b = json::parse(f.client->Get("/sessions/b/result")->body);
  a.erase("timing");
  b.erase("timing");
  CHECK(a == b);
}

TEST_CASE("seed and body errors") {
  Fixture f;
  REQUIRE(f.upload(two_texture_png(), "e")->status == 201);
  auto neg = f.post_json("/sessions/e/segment", R"({"seeds": {"objects": [{"id": 1, "points": [[-1, 0]]}]}})");
  REQUIRE(neg);
  CHECK(neg->status == 422);
  auto clash = f.post_json("/sessions/e/segment",
                           R"({"objects": [{"id": 1, "points": [[5, 5]]}, {"id": 2, "points": [[6, 5]]}]})");
  REQUIRE(clash);
  CHECK(clash->status == 422);
  auto garbage = f.post_json("/sessions/e/segment", "{not json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
  auto none = f.client->Get("/sessions/e/result");
  REQUIRE(none);
  CHECK(none->status == 404);
  CHECK(json::parse(f.client->Get("/sessions/e/status")->body)["revisions"] == 0);
}

TEST_CASE("a running job blocks further requests on its session") {
  Fixture f;
  REQUIRE(f.upload(two_texture_png(640, 480), "busy")->status == 201);
  auto first = f.post_json("/sessions/busy/segment", kSeeds);
  REQUIRE(first);
  REQUIRE(first->status == 202);
  auto second = f.post_json("/sessions/busy/segment", kSeeds);
  REQUIRE(second);
  CHECK(second->status == 409);
  auto pending = f.client->Get("/sessions/busy/result?rev=0");
  REQUIRE(pending);
  CHECK(pending->status == 409);
  CHECK(json::parse(pending->body)["status"] == "running");
  auto auto_busy = f.post_json("/sessions/busy/autoseed", R"({"k": 2})");
  REQUIRE(auto_busy);
  CHECK(auto_busy->status == 409);
  CHECK(f.wait_done("busy")["status"] == "done");
  CHECK(f.client->Get("/sessions/busy/result?rev=0")->status == 200);
}

TEST_CASE("autoseed proposals") {
  Fixture f;
  REQUIRE(f.upload(two_texture_png(200, 100), "auto")->status == 201);
  SUBCASE("k = 5") {
    auto r = f.post_json("/sessions/auto/autoseed", R"({"k": 5, "config": {"rng-seed": 3}})");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const json j = json::parse(r->body);
    CHECK(j["seeds"]["objects"].size() == 5);
    std::size_t points = 0;
    for (const auto& o : j["seeds"]["objects"]) points += o["points"].size();
    CHECK(points == 15);
    CHECK(j["diagnostics"]["k"] == 5);
    CHECK(json::parse(f.client->Get("/sessions/auto/status")->body)["revisions"] == 0);
  }
  SUBCASE("k = 1") {
    auto r = f.post_json("/sessions/auto/autoseed", R"({"k": 1})");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const json j = json::parse(r->body);
    REQUIRE(j["seeds"]["objects"].size() == 1);
    CHECK(j["seeds"]["objects"][0]["points"].size() == 3);
  }
  SUBCASE("bad k") {
    CHECK(f.post_json("/sessions/auto/autoseed", R"({"k": 51})")->status == 422);
    CHECK(f.post_json("/sessions/auto/autoseed", R"({"k": 0})")->status == 422);
    CHECK(f.post_json("/sessions/auto/autoseed", R"({})")->status == 422);
  }
}

TEST_CASE("max pixels from the environment") {
  ::setenv("FUZZYSEG_MAX_PIXELS", "1234", 1);
  CHECK(with_env_overrides(ServiceOptions{}).max_pixels == 1234);
  ::setenv("FUZZYSEG_MAX_PIXELS", "lots", 1);
  CHECK_ERROR(with_env_overrides(ServiceOptions{}), ErrorCode::kInvalidConfig);
  ::unsetenv("FUZZYSEG_MAX_PIXELS");
  CHECK(with_env_overrides(ServiceOptions{}).max_pixels == 4096u * 4096u);
}
