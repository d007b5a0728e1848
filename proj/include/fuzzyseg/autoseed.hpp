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

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/affinity.hpp"
#include "fuzzyseg/image.hpp"
#include "fuzzyseg/mofs.hpp"
#include "fuzzyseg/seeds.hpp"

namespace fuzzyseg {

inline constexpr double kDefaultLambda = 0.5;
/// Probability mass added to every bin before the symmetrized KL.
inline constexpr double kPatchSmoothing = 1.0 / kHistogramBins;

/// Dense symmetric n x n dissimilarity matrix, row-major.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

/// Symmetrized KL between smoothed patch histograms plus lambda times the
/// distance between patch centers, with each axis scaled to [0, 1].
DistanceMatrix patch_distance_matrix(const PatchGrid& grid, double lambda = kDefaultLambda);

struct Embedding {
  std::size_t n = 0;
  int dim = 0;
  std::vector<double> coords;       // n x dim, row-major
  std::vector<double> eigenvalues;  // top `dim`, descending, clamped at 0

  double at(std::size_t i, int k) const { return coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)]; }
};

/// Classical (Torgerson) scaling. Dense eigensolver for small n, Lanczos above
/// `dense_limit`.
Embedding mds_embed(const DistanceMatrix& d, int dim = 3, std::size_t dense_limit = 1000);

struct KMeansOptions {
  int max_iterations = 300;
  int restarts = 10;
};

struct KMeansResult {
  int k = 0;
  std::vector<int> labels;              // per point, 1..k
  std::vector<double> centers;          // k x dim
  double inertia = 0.0;                 // within-cluster sum of squares
  std::vector<double> inertia_history;  // after every Lloyd update of the kept run
  int iterations = 0;
};

/// k-means++ seeding then Lloyd iterations; the best of `restarts` runs by inertia.
KMeansResult kmeans(const Embedding& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

/// Mean patch center of each class (labels 1..k), in image coordinates.
std::vector<Centroid> class_centroids(const PatchGrid& grid, const std::vector<int>& labels, int k);

struct SampleOptions {
  int samples_per_class = 3;
  /// Isotropic variance of the sampling normal. Zero places every seed at the
  /// rounded centroid.
  double variance = 1.0;
  int max_attempts = 100;
};

/// Draws seed points around each centroid, one object per class. Draws whose
/// 3x3 seed footprint would touch another class's are redrawn.
SeedSpec sample_seeds(const std::vector<Centroid>& centroids, int width, int height, std::uint64_t seed,
                      const SampleOptions& options = {});

struct AutoSeedConfig {
  int patch_px = 20;
  double lambda = kDefaultLambda;
  int embed_dim = 3;
  std::uint64_t rng_seed = 0;
  KMeansOptions kmeans;
  SampleOptions sampling;

  void validate() const;
};

nlohmann::json to_json(const AutoSeedConfig& cfg);
AutoSeedConfig autoseed_config_from_json(const nlohmann::json& j, AutoSeedConfig base = {});

struct SeedProposal {
  PatchGrid grid;
  Embedding embedding;
  KMeansResult clusters;
  std::vector<Centroid> centroids;
  SeedSpec seeds;
};

/// Patch grid, distances, embedding, clustering, centroids and sampled seeds.
SeedProposal propose_seeds(const GrayImage& img, int k, const AutoSeedConfig& config);

struct AutoSegmentResult {
  SeedProposal proposal;
  AffinityModel model;
  Semisegmentation segmentation;
};

/// The full pipeline from an image and a class count. Requires k >= 2.
AutoSegmentResult auto_segment(const GrayImage& img, int k, const AutoSeedConfig& config,
                               const AffinityConfig& affinity);

/// Embedding, labels, centroids, seeds and (when given) chosen scales.
nlohmann::json diagnostics_json(const SeedProposal& proposal, const AffinityModel* model = nullptr);

}  // namespace fuzzyseg
