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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/evalbench.hpp"
#include "fuzzyseg/mosaic.hpp"
#include "fuzzyseg/pipeline.hpp"

namespace fuzzyseg {

/// One benchmark input scored under one or more affinities.
///
///   {"name": "m2", "mosaic": <layout or path>, "mode": "auto", "k": 2,
///    "affinities": ["skew", "gaussian"], "config": {...}, "rng_seed": 7}
///
/// "image" + "ground_truth" paths may replace "mosaic"; manual mode takes
/// "seeds" in the usual seeds JSON shape.
struct Experiment {
  std::string name;
  std::optional<MosaicLayout> layout;
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> ground_truth;
  bool automatic = true;
  int k = 0;  // 0: number of ground-truth labels
  std::optional<SeedSpec> seeds;
  std::vector<AffinityKind> affinities;
  PipelineConfig config;
};

struct ExperimentSpec {
  std::vector<Experiment> experiments;
  std::filesystem::path output_dir;
};

/// {"output_dir": ..., "experiments": [...]} or a single experiment object.
/// Relative paths resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct PipelineScore {
  AffinityKind affinity = AffinityKind::kSkew;
  DiceScore dice;
  std::map<int, int> matching;  // predicted id -> ground-truth id
  double seconds = 0.0;
  nlohmann::json scales;
  nlohmann::json seeds;
};

struct ScoreReport {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<PipelineScore> pipelines;
  nlohmann::json config;
  std::filesystem::path report_path;
};

nlohmann::json to_json(const ScoreReport& report);

/// Loads every input first, so a missing tile fails before any report is
/// written. Then runs experiments on up to `jobs` threads and writes
/// <output_dir>/<name>.json plus rendered maps under <output_dir>/<name>/.
std::vector<ScoreReport> run_benchmark(const ExperimentSpec& spec, int jobs = 1);

/// Plain-text table: experiment, affinity, weighted Dice, seconds.
std::string format_score_table(const std::vector<ScoreReport>& reports);

}  // namespace fuzzyseg
