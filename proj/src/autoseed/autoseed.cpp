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

#include "fuzzyseg/autoseed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

std::vector<Centroid> class_centroids(const PatchGrid& grid, const std::vector<int>& labels, int k) {
  if (labels.size() != grid.patches.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per patch expected");
  }
  if (k < 1) throw Error(ErrorCode::kBadK, "k must be >= 1");
  std::vector<Centroid> sums(static_cast<std::size_t>(k));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 1 || c > k) throw Error(ErrorCode::kBadK, "label " + std::to_string(c) + " outside 1.." + std::to_string(k));
    sums[static_cast<std::size_t>(c - 1)].x += grid.patches[i].center_x;
    sums[static_cast<std::size_t>(c - 1)].y += grid.patches[i].center_y;
    ++counts[static_cast<std::size_t>(c - 1)];
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] == 0) throw Error(ErrorCode::kEmptyClass, "class " + std::to_string(c + 1) + " has no patches");
    sums[c].x /= static_cast<double>(counts[c]);
    sums[c].y /= static_cast<double>(counts[c]);
  }
  return sums;
}

SeedSpec sample_seeds(const std::vector<Centroid>& centroids, int width, int height, std::uint64_t seed,
                      const SampleOptions& options) {
  if (options.samples_per_class < 1 || options.max_attempts < 1 || !(options.variance >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid sampling options");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(options.variance);

  SeedSpec spec;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const Centroid& mu = centroids[c];
    if (!(mu.x >= 0.0 && mu.y >= 0.0 && mu.x <= width - 1 && mu.y <= height - 1)) {
      throw Error(ErrorCode::kOutOfRange, "centroid of class " + std::to_string(c + 1) + " lies outside the image");
    }
    ObjectSeeds obj;
    obj.id = static_cast<int>(c) + 1;
    for (int s = 0; s < options.samples_per_class; ++s) {
      bool accepted = false;
      for (int attempt = 0; attempt < options.max_attempts && !accepted; ++attempt) {
        const double dx = normal(rng);
        const double dy = normal(rng);
        const Spel p{std::clamp(static_cast<int>(std::lround(mu.x + sd * dx)), 0, width - 1),
                     std::clamp(static_cast<int>(std::lround(mu.y + sd * dy)), 0, height - 1)};
        // Dilated 3x3 footprints of two points meet when they are within 2 in both axes.
        bool clash = false;
        for (const ObjectSeeds& other : spec.objects) {
          for (const Spel& q : other.points) {
            if (std::abs(q.x - p.x) <= 2 && std::abs(q.y - p.y) <= 2) clash = true;
          }
        }
        if (options.variance > 0.0 && std::find(obj.points.begin(), obj.points.end(), p) != obj.points.end()) {
          clash = true;
        }
        if (!clash) {
          obj.points.push_back(p);
          accepted = true;
        }
      }
      if (!accepted) {
        throw Error(ErrorCode::kSamplingExhausted, "no admissible seed for class " + std::to_string(c + 1) +
                                                       " after " + std::to_string(options.max_attempts) + " draws");
      }
    }
    spec.objects.push_back(std::move(obj));
  }
  return spec;
}

void AutoSeedConfig::validate() const {
  if (patch_px < 2) throw Error(ErrorCode::kInvalidConfig, "patch size must be >= 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::kInvalidConfig, "lambda must be >= 0");
  if (embed_dim < 1) throw Error(ErrorCode::kInvalidConfig, "embedding dimension must be >= 1");
  if (kmeans.max_iterations < 1 || kmeans.restarts < 1) {
    throw Error(ErrorCode::kInvalidConfig, "k-means needs at least one iteration and one restart");
  }
  if (sampling.samples_per_class < 1 || sampling.max_attempts < 1 || !(sampling.variance >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid sampling options");
  }
}

nlohmann::json to_json(const AutoSeedConfig& cfg) {
  return {{"patch", cfg.patch_px},
          {"lambda", cfg.lambda},
          {"embed-dim", cfg.embed_dim},
          {"rng-seed", cfg.rng_seed},
          {"kmeans-restarts", cfg.kmeans.restarts},
          {"kmeans-max-iter", cfg.kmeans.max_iterations},
          {"samples-per-class", cfg.sampling.samples_per_class},
          {"sample-variance", cfg.sampling.variance},
          {"sample-attempts", cfg.sampling.max_attempts}};
}

AutoSeedConfig autoseed_config_from_json(const nlohmann::json& j, AutoSeedConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "auto-seed config must be a JSON object");
  try {
    if (j.contains("patch")) base.patch_px = j["patch"].get<int>();
    if (j.contains("lambda")) base.lambda = j["lambda"].get<double>();
    if (j.contains("embed-dim")) base.embed_dim = j["embed-dim"].get<int>();
    if (j.contains("rng-seed")) base.rng_seed = j["rng-seed"].get<std::uint64_t>();
    if (j.contains("kmeans-restarts")) base.kmeans.restarts = j["kmeans-restarts"].get<int>();
    if (j.contains("kmeans-max-iter")) base.kmeans.max_iterations = j["kmeans-max-iter"].get<int>();
    if (j.contains("samples-per-class")) base.sampling.samples_per_class = j["samples-per-class"].get<int>();
    if (j.contains("sample-variance")) base.sampling.variance = j["sample-variance"].get<double>();
    if (j.contains("sample-attempts")) base.sampling.max_attempts = j["sample-attempts"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("auto-seed config: ") + e.what());
  }
  base.validate();
  return base;
}

SeedProposal propose_seeds(const GrayImage& img, int k, const AutoSeedConfig& config) {
  config.validate();
  SeedProposal out;
  out.grid = make_patch_grid(img, config.patch_px);
  const std::size_t n = out.grid.patches.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kBadK, "k = " + std::to_string(k) + " must lie in 1.." + std::to_string(n) +
                                      " (the number of patches)");
  }
  const DistanceMatrix d = patch_distance_matrix(out.grid, config.lambda);
  out.embedding = mds_embed(d, config.embed_dim);
  out.clusters = kmeans(out.embedding, k, config.rng_seed, config.kmeans);
  out.centroids = class_centroids(out.grid, out.clusters.labels, k);
  out.seeds = sample_seeds(out.centroids, img.width(), img.height(), config.rng_seed, config.sampling);
  return out;
}

AutoSegmentResult auto_segment(const GrayImage& img, int k, const AutoSeedConfig& config,
                               const AffinityConfig& affinity) {
  if (k < 2) throw Error(ErrorCode::kBadK, "automatic segmentation needs k >= 2");
  AutoSegmentResult r;
  r.proposal = propose_seeds(img, k, config);
  r.model = AffinityModel::fit(img, r.proposal.seeds, affinity);
  r.segmentation = segment(img, r.proposal.seeds, r.model);
  return r;
}

nlohmann::json diagnostics_json(const SeedProposal& proposal, const AffinityModel* model) {
  nlohmann::json embedding = nlohmann::json::array();
  for (std::size_t i = 0; i < proposal.embedding.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < proposal.embedding.dim; ++k) row.push_back(proposal.embedding.at(i, k));
    embedding.push_back(row);
  }
  nlohmann::json patches = nlohmann::json::array();
  for (const Patch& p : proposal.grid.patches) {
    patches.push_back({{"x0", p.rect.x0}, {"y0", p.rect.y0}, {"x1", p.rect.x1}, {"y1", p.rect.y1},
                       {"center", {p.center_x, p.center_y}}});
  }
  nlohmann::json centroids = nlohmann::json::array();
  for (const Centroid& c : proposal.centroids) centroids.push_back({c.x, c.y});
  nlohmann::json out = {
      {"k", proposal.clusters.k},
      {"patch_px", proposal.grid.patch_px},
      {"grid", {{"cols", proposal.grid.cols}, {"rows", proposal.grid.rows}}},
      {"patches", patches},
      {"embedding", embedding},
      {"eigenvalues", proposal.embedding.eigenvalues},
      {"labels", proposal.clusters.labels},
      {"kmeans",
       {{"inertia", proposal.clusters.inertia},
        {"iterations", proposal.clusters.iterations},
        {"inertia_history", proposal.clusters.inertia_history}}},
      {"centroids", centroids},
      {"seeds", seeds_to_json(proposal.seeds)},
  };
  if (model != nullptr) out["scales"] = scales_to_json(*model);
  return out;
}

}  // namespace fuzzyseg
