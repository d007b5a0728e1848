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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fuzzyseg/image.hpp"
#include "fuzzyseg/seeds.hpp"

namespace fuzzyseg {

/// Floor applied to fitted standard deviations so that rho never degenerates
/// into a delta on constant seed regions.
inline constexpr double kEpsStd = 1e-4;
/// Floor applied to the skew divergence scale s_m.
inline constexpr double kEpsDiv = 1e-3;
inline constexpr int kDefaultMaxScale = 15;

enum class AffinityKind { kGaussian, kGaussianAdaptive, kSkew };

std::string_view to_string(AffinityKind kind);
AffinityKind parse_affinity_kind(std::string_view text);

struct AffinityConfig {
  AffinityKind kind = AffinityKind::kSkew;
  double alpha = 0.99;
  double mean_thresh = 0.06;
  double std_thresh = 0.04;
  double div_thresh = 0.8;
  int max_scale = kDefaultMaxScale;

  void validate() const;
};

nlohmann::json to_json(const AffinityConfig& cfg);
/// Missing keys keep the values already in `base`.
AffinityConfig affinity_config_from_json(const nlohmann::json& j, AffinityConfig base = {});

/// Gaussian bump with peak 1: exp(-(x - mean)^2 / (2 std^2)).
double rho(double x, double mean, double std);

inline bool edge_adjacent(Spel c, Spel d) {
  const int dx = c.x > d.x ? c.x - d.x : d.x - c.x;
  const int dy = c.y > d.y ? c.y - d.y : d.y - c.y;
  return dx + dy == 1;
}

// ---------------------------------------------------------------------------
// Divergences. Both inputs are probability vectors of equal length.

/// KL(q || r) in nats. Throws UndefinedDivergence when r vanishes where q does not.
double kl_divergence(std::span<const double> q, std::span<const double> r);

/// Skew divergence SD_alpha(q, r) = KL(r || alpha q + (1 - alpha) r).
/// Finite for alpha < 1; alpha == 1 reduces to KL(r || q) and may throw.
double skew_divergence(std::span<const double> q, std::span<const double> r, double alpha);

// ---------------------------------------------------------------------------
// Parameters.

struct GaussianAffinityParams {
  int object = 0;
  double g = 0.0;  // mean of pair-average brightness
  double h = kEpsStd;  // std of pair-average brightness
  double a = 0.0;  // mean of pair absolute difference
  double b = kEpsStd;  // std of pair absolute difference
};

/// Fits (g, h, a, b) over every edge-adjacent pair with both spels in `region`.
GaussianAffinityParams fit_gaussian_params(const GrayImage& img, const std::vector<Spel>& region, int object = 0);

struct ScaleTraceEntry {
  int side = 0;
  double mean_pairs = 0.0;  // gaussian mode: seed-averaged window statistics
  double std_pairs = 0.0;
  double divergence = 0.0;  // skew mode: SD between this side and the previous one
};

struct ScaleSelection {
  int object = 0;
  int side = 3;
  std::vector<ScaleTraceEntry> trace;

  int halfwidth() const { return side / 2; }
};

enum class ScaleMode { kGaussian, kSkew };

struct ScaleThresholds {
  double mean_thresh = 0.06;
  double std_thresh = 0.04;
  double div_thresh = 0.8;
  double alpha = 0.99;
  int max_scale = kDefaultMaxScale;
};

/// Grows the window side 3, 5, 7, ... around the seeds and returns the side at
/// which the seed statistics stop changing between consecutive sizes, or
/// max_scale when they never settle.
ScaleSelection select_scale(const GrayImage& img, const std::vector<Spel>& seeds, ScaleMode mode,
                            const ScaleThresholds& thresholds);

/// Window-level statistics of the seed region used by the adaptive Gaussian
/// affinity's second term.
struct WindowPairParams {
  double mean = 0.0;
  double std = kEpsStd;
};

WindowPairParams fit_window_params(const GrayImage& img, const std::vector<Spel>& region,
                                   const ScaleSelection& scale);

struct SkewAffinityParams {
  int object = 0;
  Distribution seed_histogram{};  // pooled over the seed windows, normalized
  double alpha = 0.99;
  double div_scale = kEpsDiv;  // s_m
};

SkewAffinityParams fit_skew_params(const GrayImage& img, const std::vector<Spel>& region,
                                   const ScaleSelection& scale, double alpha, int object = 0);

// ---------------------------------------------------------------------------
// Pointwise affinities. All return 0 for pairs that are not edge-adjacent.

double gaussian_affinity(Spel c, Spel d, const GrayImage& img, const GaussianAffinityParams& p);

/// Mean of pair-average brightness over the union of the two windows around
/// c and d at the given side.
double union_window_mean(const GrayImage& img, Spel c, Spel d, int side);

double adaptive_gaussian_affinity(Spel c, Spel d, const GrayImage& img, const GaussianAffinityParams& p,
                                  const WindowPairParams& window, const ScaleSelection& scale);

double skew_affinity(Spel c, Spel d, const GrayImage& img, const SkewAffinityParams& p,
                     const ScaleSelection& scale);

// ---------------------------------------------------------------------------
// Model: one parameter set per object.

struct ObjectAffinity {
  int object = 0;
  AffinityKind kind = AffinityKind::kSkew;
  ScaleSelection scale;
  GaussianAffinityParams gaussian;
  WindowPairParams window;
  SkewAffinityParams skew;
};

struct AffinityModel {
  AffinityConfig config;
  std::vector<ObjectAffinity> objects;  // index m - 1 holds object m

  int object_count() const { return static_cast<int>(objects.size()); }

  /// Fits every object's parameters from its dilated seed set.
  static AffinityModel fit(const GrayImage& img, const SeedSpec& seeds, const AffinityConfig& config);
};

nlohmann::json scales_to_json(const AffinityModel& model);

/// An AffinityModel bound to one image with every per-spel quantity the link
/// evaluation needs precomputed. Evaluation is const and reentrant.
class BoundAffinity {
 public:
  BoundAffinity(const GrayImage& img, const AffinityModel& model);

  int object_count() const { return model_->object_count(); }

  /// psi_m(c, d) for edge-adjacent spels given as row-major indices.
  double value(int object, std::size_t c, std::size_t d) const;

 private:
  double pair_union_mean(std::size_t c, std::size_t d, int halfwidth) const;

  const GrayImage* img_;
  const AffinityModel* model_;
  // Integral images of horizontal and vertical pair averages, (w+1) x (h+1).
  std::vector<double> h_pairs_;
  std::vector<double> v_pairs_;
  // Per object: SD between the seed histogram and the window histogram at each spel.
  std::vector<std::vector<double>> divergence_;
};

/// SD_alpha(reference, window histogram) at every spel for one window side.
std::vector<double> divergence_field(const GrayImage& img, const Distribution& reference, double alpha, int side);

}  // namespace fuzzyseg
