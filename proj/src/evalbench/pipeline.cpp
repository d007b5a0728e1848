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

#include "fuzzyseg/pipeline.hpp"

#include <chrono>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/evalbench.hpp"
#include "fuzzyseg/image_io.hpp"

namespace fuzzyseg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void PipelineConfig::validate() const {
  affinity.validate();
  autoseed.validate();
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = to_json(cfg.affinity);
  j.update(to_json(cfg.autoseed));
  return j;
}

const std::vector<std::string>& pipeline_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : to_json(PipelineConfig{}).items()) out.push_back(k);
    return out;
  }();
  return keys;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "pipeline config must be a JSON object");
  base.affinity = affinity_config_from_json(j, base.affinity);
  base.autoseed = autoseed_config_from_json(j, base.autoseed);
  return base;
}

PipelineResult run_manual(const GrayImage& img, const SeedSpec& seeds, const PipelineConfig& config) {
  config.validate();
  const auto start = Clock::now();
  PipelineResult r;
  r.seeds = normalized(seeds);
  r.model = AffinityModel::fit(img, r.seeds, config.affinity);
  r.segmentation = segment(img, r.seeds, r.model);
  r.seconds = seconds_since(start);
  return r;
}

PipelineResult run_auto(const GrayImage& img, int k, const PipelineConfig& config) {
  config.validate();
  const auto start = Clock::now();
  AutoSegmentResult a = auto_segment(img, k, config.autoseed, config.affinity);
  PipelineResult r;
  r.seeds = a.proposal.seeds;
  r.model = std::move(a.model);
  r.segmentation = std::move(a.segmentation);
  r.proposal = std::move(a.proposal);
  r.seconds = seconds_since(start);
  return r;
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const PipelineResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const Bytes& bytes) {
    write_file_atomic(dir / name, bytes);
    written.push_back(dir / name);
  };
  auto put_text = [&](const std::string& name, const std::string& text) {
    write_text_atomic(dir / name, text);
    written.push_back(dir / name);
  };
  const Semisegmentation& seg = result.segmentation;
  put("segmentation.bin", seg.serialize());
  for (int m = 1; m <= seg.object_count(); ++m) {
    put("object_" + std::to_string(m) + ".png", encode_png(connectedness_image(seg, m)));
  }
  put("crisp.png", encode_label_png(crisp_labels(seg, CrispOptions{true})));
  put("render.png", encode_rgb_png(render_connectedness(seg)));
  put_text("scales.json", scales_to_json(result.model).dump(2) + "\n");
  put_text("seeds.json", seeds_to_json(result.seeds).dump(2) + "\n");
  if (result.proposal) put_text("diagnostics.json", diagnostics_json(*result.proposal, &result.model).dump(2) + "\n");
  return written;
}

}  // namespace fuzzyseg
