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

#include "fuzzyseg/seeds.hpp"

#include <algorithm>
#include <map>

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

std::size_t SeedSpec::point_count() const {
  std::size_t n = 0;
  for (const auto& o : objects) n += o.points.size();
  return n;
}

const ObjectSeeds& SeedSpec::object(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return o;
  }
  throw Error(ErrorCode::kBadObjectId, "no object with id " + std::to_string(id));
}

std::vector<Spel> dilate8(const std::vector<Spel>& points, int width, int height) {
  std::vector<Spel> out;
  out.reserve(points.size() * 9);
  for (const Spel& p : points) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Spel s{p.x + dx, p.y + dy};
        if (s.x >= 0 && s.y >= 0 && s.x < width && s.y < height) out.push_back(s);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](Spel a, Spel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate_seeds(const SeedSpec& seeds, int width, int height) {
  if (seeds.objects.empty()) throw Error(ErrorCode::kEmptySeeds, "no objects given");
  std::vector<bool> seen(seeds.objects.size() + 1, false);
  for (const auto& o : seeds.objects) {
    if (o.id < 1 || o.id > seeds.object_count() || seen[static_cast<std::size_t>(o.id)]) {
      throw Error(ErrorCode::kBadObjectId, "object ids must be exactly 1.." + std::to_string(seeds.object_count()) +
                                               ", got " + std::to_string(o.id));
    }
    seen[static_cast<std::size_t>(o.id)] = true;
    if (o.points.empty()) {
      throw Error(ErrorCode::kEmptySeeds, "object " + std::to_string(o.id) + " has no seed points");
    }
    for (const Spel& p : o.points) {
      if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
        throw Error(ErrorCode::kOutOfRange, "seed (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                                ") of object " + std::to_string(o.id) + " lies outside the " +
                                                std::to_string(width) + "x" + std::to_string(height) + " image");
      }
    }
  }
  std::map<std::pair<int, int>, int> owner;
  for (const auto& o : seeds.objects) {
    for (const Spel& s : dilate8(o.points, width, height)) {
      auto [it, inserted] = owner.emplace(std::pair{s.x, s.y}, o.id);
      if (!inserted && it->second != o.id) {
        throw Error(ErrorCode::kConflictingSeeds, "spel (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                                      ") is a seed of objects " + std::to_string(it->second) +
                                                      " and " + std::to_string(o.id));
      }
    }
  }
}

SeedSpec normalized(SeedSpec seeds) {
  std::sort(seeds.objects.begin(), seeds.objects.end(),
            [](const ObjectSeeds& a, const ObjectSeeds& b) { return a.id < b.id; });
  return seeds;
}

SeedSpec seeds_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("objects") || !j["objects"].is_array()) {
    throw Error(ErrorCode::kInvalidConfig, "seeds JSON needs an \"objects\" array");
  }
  SeedSpec spec;
  for (const auto& o : j["objects"]) {
    if (!o.is_object() || !o.contains("id") || !o.contains("points") || !o["id"].is_number_integer() ||
        !o["points"].is_array()) {
      throw Error(ErrorCode::kInvalidConfig, "each object needs an integer \"id\" and a \"points\" array");
    }
    ObjectSeeds seeds;
    seeds.id = o["id"].get<int>();
    for (const auto& p : o["points"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        throw Error(ErrorCode::kInvalidConfig, "seed points must be [x, y] integer pairs");
      }
      seeds.points.push_back(Spel{p[0].get<int>(), p[1].get<int>()});
    }
    spec.objects.push_back(std::move(seeds));
  }
  return spec;
}

nlohmann::json seeds_to_json(const SeedSpec& seeds) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : seeds.objects) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Spel& p : o.points) pts.push_back({p.x, p.y});
    objects.push_back({{"id", o.id}, {"points", pts}});
  }
  return {{"objects", objects}};
}

}  // namespace fuzzyseg
