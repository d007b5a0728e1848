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

#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/image.hpp"

namespace fuzzyseg {

/// Clicked points for one object. The object's seed set is these points plus
/// their eight neighbors (see dilate8).
struct ObjectSeeds {
  int id = 0;
  std::vector<Spel> points;
};

struct SeedSpec {
  std::vector<ObjectSeeds> objects;

  int object_count() const { return static_cast<int>(objects.size()); }
  std::size_t point_count() const;
  /// Objects sorted by id; validate() guarantees ids are exactly 1..M.
  const ObjectSeeds& object(int id) const;
};

/// Points plus their 8-neighbors, clipped to the image, sorted and unique.
std::vector<Spel> dilate8(const std::vector<Spel>& points, int width, int height);

/// Throws EmptySeeds, BadObjectId, OutOfRange (naming the seed) or
/// ConflictingSeeds when two objects' dilated seed sets share a spel.
void validate_seeds(const SeedSpec& seeds, int width, int height);

/// Returns the seeds with objects sorted by id.
SeedSpec normalized(SeedSpec seeds);

// {"objects": [{"id": 1, "points": [[x, y], ...]}, ...]}
SeedSpec seeds_from_json(const nlohmann::json& j);
nlohmann::json seeds_to_json(const SeedSpec& seeds);

}  // namespace fuzzyseg
