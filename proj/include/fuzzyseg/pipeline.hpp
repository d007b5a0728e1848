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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/affinity.hpp"
#include "fuzzyseg/autoseed.hpp"
#include "fuzzyseg/mofs.hpp"
#include "fuzzyseg/seeds.hpp"

namespace fuzzyseg {

/// Every tunable of a segmentation run.
struct PipelineConfig {
  AffinityConfig affinity;
  AutoSeedConfig autoseed;

  void validate() const;
};

/// Flat JSON object holding both the affinity and auto-seed keys.
nlohmann::json to_json(const PipelineConfig& cfg);
/// Missing keys keep `base`; keys outside pipeline_config_keys() are ignored.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
const std::vector<std::string>& pipeline_config_keys();

struct PipelineResult {
  SeedSpec seeds;  // clicked or sampled points, before dilation
  AffinityModel model;
  Semisegmentation segmentation;
  std::optional<SeedProposal> proposal;  // automatic runs only
  double seconds = 0.0;                  // wall clock of the pipeline, excluding I/O
};

PipelineResult run_manual(const GrayImage& img, const SeedSpec& seeds, const PipelineConfig& config);
PipelineResult run_auto(const GrayImage& img, int k, const PipelineConfig& config);

/// Writes segmentation.bin, object_<m>.png, crisp.png, render.png,
/// scales.json, seeds.json, and diagnostics.json for automatic runs.
/// Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const PipelineResult& result);

}  // namespace fuzzyseg
