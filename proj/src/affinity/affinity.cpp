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

#include "fuzzyseg/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <unordered_set>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/kernels/kernels.hpp"

namespace fuzzyseg {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return out;
}

void check_spel(const GrayImage& img, Spel s) {
  if (!img.contains(s)) {
    throw Error(ErrorCode::kOutOfRange,
                "spel (" + std::to_string(s.x) + "," + std::to_string(s.y) + ") outside the image");
  }
}

Histogram pooled_histogram(const GrayImage& img, const std::vector<Spel>& spels, int side) {
  Histogram pooled;
  for (const Spel& s : spels) pooled.merge(window_histogram(img, Window::with_side(s, side)));
  return pooled;
}

// Splits [0, rows) into contiguous blocks run on separate threads.
template <typename Fn>
void parallel_rows(int rows, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(std::max(1, rows / 16))));
  if (workers <= 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  const int step = (rows + workers - 1) / workers;
  for (int start = 0; start < rows; start += step) {
    pool.emplace_back([&fn, start, end = std::min(rows, start + step)] { fn(start, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::string_view to_string(AffinityKind kind) {
  switch (kind) {
    case AffinityKind::kGaussian: return "gaussian";
    case AffinityKind::kGaussianAdaptive: return "gaussian-adaptive";
    case AffinityKind::kSkew: return "skew";
  }
  return "unknown";
}

AffinityKind parse_affinity_kind(std::string_view text) {
  if (text == "gaussian") return AffinityKind::kGaussian;
  if (text == "gaussian-adaptive") return AffinityKind::kGaussianAdaptive;
  if (text == "skew") return AffinityKind::kSkew;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown affinity '" + std::string(text) + "' (expected gaussian, gaussian-adaptive or skew)");
}

void AffinityConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1)");
  if (!(mean_thresh > 0.0) || !(std_thresh > 0.0) || !(div_thresh > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "scale thresholds must be positive");
  }
  if (max_scale < 3 || max_scale % 2 == 0) {
    throw Error(ErrorCode::kInvalidConfig, "max-scale must be an odd integer >= 3");
  }
}

nlohmann::json to_json(const AffinityConfig& cfg) {
  return {{"affinity", std::string(to_string(cfg.kind))},
          {"alpha", cfg.alpha},
          {"mean-thresh", cfg.mean_thresh},
          {"std-thresh", cfg.std_thresh},
          {"div-thresh", cfg.div_thresh},
          {"max-scale", cfg.max_scale}};
}

AffinityConfig affinity_config_from_json(const nlohmann::json& j, AffinityConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "affinity config must be a JSON object");
  try {
    if (j.contains("affinity")) base.kind = parse_affinity_kind(j["affinity"].get<std::string>());
    if (j.contains("alpha")) base.alpha = j["alpha"].get<double>();
    if (j.contains("mean-thresh")) base.mean_thresh = j["mean-thresh"].get<double>();
    if (j.contains("std-thresh")) base.std_thresh = j["std-thresh"].get<double>();
    if (j.contains("div-thresh")) base.div_thresh = j["div-thresh"].get<double>();
    if (j.contains("max-scale")) base.max_scale = j["max-scale"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("affinity config: ") + e.what());
  }
  base.validate();
  return base;
}

double rho(double x, double mean, double std) {
  if (!(std > 0.0)) throw Error(ErrorCode::kNonPositiveStd, "rho needs a positive standard deviation");
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z);
}

double kl_divergence(std::span<const double> q, std::span<const double> r) {
  if (q.size() != r.size()) throw Error(ErrorCode::kDimensionMismatch, "distributions differ in length");
  const double d = kernels::active().kl_divergence(q.data(), r.data(), q.size());
  if (std::isinf(d)) throw Error(ErrorCode::kUndefinedDivergence, "r(y) = 0 where q(y) > 0");
  return d;
}

double skew_divergence(std::span<const double> q, std::span<const double> r, double alpha) {
  if (q.size() != r.size()) throw Error(ErrorCode::kDimensionMismatch, "distributions differ in length");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kOutOfRange, "alpha must lie in [0, 1]");
  const double d = kernels::active().skew_divergence(q.data(), r.data(), alpha, q.size());
  if (std::isinf(d)) throw Error(ErrorCode::kUndefinedDivergence, "q(y) = 0 where r(y) > 0 at alpha = 1");
  // Rounding can leave tiny negatives when q == r.
  return std::max(d, 0.0);
}

GaussianAffinityParams fit_gaussian_params(const GrayImage& img, const std::vector<Spel>& region, int object) {
  std::unordered_set<std::size_t> members;
  for (const Spel& s : region) {
    check_spel(img, s);
    members.insert(img.index(s.x, s.y));
  }
  std::vector<double> averages;
  std::vector<double> differences;
  for (const Spel& s : region) {
    const double v = img.at(s);
    for (const Spel n : {Spel{s.x + 1, s.y}, Spel{s.x, s.y + 1}}) {
      if (!img.contains(n) || !members.count(img.index(n.x, n.y))) continue;
      const double u = img.at(n);
      averages.push_back(0.5 * (v + u));
      differences.push_back(std::abs(v - u));
    }
  }
  if (averages.empty()) throw Error(ErrorCode::kNoAdjacentPairs, "seed region has no edge-adjacent pair");
  const MeanStd g = mean_std(averages);
  const MeanStd a = mean_std(differences);
  return GaussianAffinityParams{object, g.mean, std::max(g.std, kEpsStd), a.mean, std::max(a.std, kEpsStd)};
}

ScaleSelection select_scale(const GrayImage& img, const std::vector<Spel>& seeds, ScaleMode mode,
                            const ScaleThresholds& t) {
  if (seeds.empty()) throw Error(ErrorCode::kNoSeeds, "scale selection needs at least one seed");
  if (t.max_scale < 3 || t.max_scale % 2 == 0) {
    throw Error(ErrorCode::kInvalidConfig, "max-scale must be an odd integer >= 3");
  }
  for (const Spel& s : seeds) check_spel(img, s);

  ScaleSelection sel;
  sel.side = t.max_scale;
  const double n = static_cast<double>(seeds.size());

  if (mode == ScaleMode::kGaussian) {
    auto stats_at = [&](int side) {
      ScaleTraceEntry e{side, 0.0, 0.0, 0.0};
      for (const Spel& s : seeds) {
        const PairStats ps = window_stats(img, Window::with_side(s, side));
        e.mean_pairs += ps.mean_pairs;
        e.std_pairs += ps.std_pairs;
      }
      e.mean_pairs /= n;
      e.std_pairs /= n;
      return e;
    };
    sel.trace.push_back(stats_at(3));
    for (int side = 3; side + 2 <= t.max_scale; side += 2) {
      const ScaleTraceEntry next = stats_at(side + 2);
      const ScaleTraceEntry& prev = sel.trace.back();
      const bool settled = std::abs(next.mean_pairs - prev.mean_pairs) < t.mean_thresh &&
                           std::abs(next.std_pairs - prev.std_pairs) < t.std_thresh;
      sel.trace.push_back(next);
      if (settled) {
        sel.side = side + 2;
        return sel;
      }
    }
    return sel;
  }

  Distribution prev = pooled_histogram(img, seeds, 3).normalized();
  sel.trace.push_back(ScaleTraceEntry{3, 0.0, 0.0, 0.0});
  for (int side = 3; side + 2 <= t.max_scale; side += 2) {
    const Distribution next = pooled_histogram(img, seeds, side + 2).normalized();
    // Mass the larger window puts where the smaller one had none.
    const double d = skew_divergence(prev, next, t.alpha);
    sel.trace.push_back(ScaleTraceEntry{side + 2, 0.0, 0.0, d});
    if (d < t.div_thresh) {
      sel.side = side + 2;
      return sel;
    }
    prev = next;
  }
  return sel;
}

WindowPairParams fit_window_params(const GrayImage& img, const std::vector<Spel>& region,
                                   const ScaleSelection& scale) {
  if (region.empty()) throw Error(ErrorCode::kNoSeeds, "empty seed region");
  WindowPairParams out{0.0, 0.0};
  for (const Spel& s : region) {
    check_spel(img, s);
    const PairStats ps = window_stats(img, Window::with_side(s, scale.side));
    out.mean += ps.mean_pairs;
    out.std += ps.std_pairs;
  }
  out.mean /= static_cast<double>(region.size());
  out.std = std::max(out.std / static_cast<double>(region.size()), kEpsStd);
  return out;
}

SkewAffinityParams fit_skew_params(const GrayImage& img, const std::vector<Spel>& region,
                                   const ScaleSelection& scale, double alpha, int object) {
  if (region.empty()) throw Error(ErrorCode::kNoSeeds, "empty seed region");
  for (const Spel& s : region) check_spel(img, s);
  SkewAffinityParams p;
  p.object = object;
  p.alpha = alpha;
  p.seed_histogram = pooled_histogram(img, region, scale.side).normalized();
  double sum = 0.0;
  for (const Spel& s : region) {
    const Distribution w = window_histogram(img, Window::with_side(s, scale.side)).normalized();
    sum += skew_divergence(p.seed_histogram, w, alpha);
  }
  p.div_scale = std::max(sum / static_cast<double>(region.size()), kEpsDiv);
  return p;
}

double gaussian_affinity(Spel c, Spel d, const GrayImage& img, const GaussianAffinityParams& p) {
  if (!edge_adjacent(c, d)) return 0.0;
  check_spel(img, c);
  check_spel(img, d);
  const double vc = img.at(c);
  const double vd = img.at(d);
  return 0.5 * (rho(0.5 * (vc + vd), p.g, p.h) + rho(std::abs(vc - vd), p.a, p.b));
}

double union_window_mean(const GrayImage& img, Spel c, Spel d, int side) {
  const int h = side / 2;
  const Rect r{std::min(c.x, d.x) - h, std::min(c.y, d.y) - h, std::max(c.x, d.x) + h, std::max(c.y, d.y) + h};
  return rect_pair_stats(img, r).mean_pairs;
}

double adaptive_gaussian_affinity(Spel c, Spel d, const GrayImage& img, const GaussianAffinityParams& p,
                                  const WindowPairParams& window, const ScaleSelection& scale) {
  if (!edge_adjacent(c, d)) return 0.0;
  check_spel(img, c);
  check_spel(img, d);
  const double g = 0.5 * (img.at(c) + img.at(d));
  const double x = union_window_mean(img, c, d, scale.side);
  return 0.5 * (rho(g, p.g, p.h) + rho(x, window.mean, window.std));
}

double skew_affinity(Spel c, Spel d, const GrayImage& img, const SkewAffinityParams& p,
                     const ScaleSelection& scale) {
  if (!edge_adjacent(c, d)) return 0.0;
  check_spel(img, c);
  check_spel(img, d);
  const Distribution hc = window_histogram(img, Window::with_side(c, scale.side)).normalized();
  const Distribution hd = window_histogram(img, Window::with_side(d, scale.side)).normalized();
  const double s = 0.5 * (skew_divergence(p.seed_histogram, hc, p.alpha) +
                          skew_divergence(p.seed_histogram, hd, p.alpha));
  return std::exp(-s / p.div_scale);
}

AffinityModel AffinityModel::fit(const GrayImage& img, const SeedSpec& raw_seeds, const AffinityConfig& config) {
  config.validate();
  validate_seeds(raw_seeds, img.width(), img.height());
  const SeedSpec seeds = normalized(raw_seeds);
  const ScaleThresholds thresholds{config.mean_thresh, config.std_thresh, config.div_thresh, config.alpha,
                                   config.max_scale};
  AffinityModel model;
  model.config = config;
  for (const ObjectSeeds& o : seeds.objects) {
    const std::vector<Spel> region = dilate8(o.points, img.width(), img.height());
    ObjectAffinity oa;
    oa.object = o.id;
    oa.kind = config.kind;
    switch (config.kind) {
      case AffinityKind::kGaussian:
        oa.scale.object = o.id;
        oa.scale.side = 3;
        oa.gaussian = fit_gaussian_params(img, region, o.id);
        break;
      case AffinityKind::kGaussianAdaptive:
        oa.scale = select_scale(img, region, ScaleMode::kGaussian, thresholds);
        oa.gaussian = fit_gaussian_params(img, region, o.id);
        oa.window = fit_window_params(img, region, oa.scale);
        break;
      case AffinityKind::kSkew:
        oa.scale = select_scale(img, region, ScaleMode::kSkew, thresholds);
        oa.skew = fit_skew_params(img, region, oa.scale, config.alpha, o.id);
        break;
    }
    oa.scale.object = o.id;
    model.objects.push_back(std::move(oa));
  }
  return model;
}

nlohmann::json scales_to_json(const AffinityModel& model) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& o : model.objects) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : o.scale.trace) {
      trace.push_back({{"side", e.side}, {"mean_pairs", e.mean_pairs}, {"std_pairs", e.std_pairs},
                       {"divergence", e.divergence}});
    }
    out.push_back({{"object", o.object}, {"side", o.scale.side}, {"trace", trace}});
  }
  return out;
}

std::vector<double> divergence_field(const GrayImage& img, const Distribution& reference, double alpha, int side) {
  const int w = img.width();
  const int h = img.height();
  const int half = side / 2;
  const kernels::KernelTable& k = kernels::active();
  std::vector<double> out(img.size());
  std::vector<int> bins(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bins[i] = intensity_bin(img.data()[i]);

  parallel_rows(h, [&](int row_begin, int row_end) {
    Distribution r{};
    for (int y = row_begin; y < row_end; ++y) {
      const int y0 = std::max(0, y - half);
      const int y1 = std::min(h - 1, y + half);
      Histogram hist;
      auto add_column = [&](int x, bool add) {
        for (int yy = y0; yy <= y1; ++yy) {
          const int b = bins[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
          if (add) {
            hist.add(b);
          } else {
            hist.remove(b);
          }
        }
      };
      for (int x = 0; x <= std::min(w - 1, half); ++x) add_column(x, true);
      for (int x = 0; x < w; ++x) {
        if (x > 0) {
          if (x + half < w) add_column(x + half, true);
          if (x - half - 1 >= 0) add_column(x - half - 1, false);
        }
        const double inv = 1.0 / static_cast<double>(hist.total());
        for (int b = 0; b < kHistogramBins; ++b) r[static_cast<std::size_t>(b)] = hist[b] * inv;
        const double d = k.skew_divergence(reference.data(), r.data(), alpha, r.size());
        out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
            std::max(d, 0.0);
      }
    }
  });
  return out;
}

BoundAffinity::BoundAffinity(const GrayImage& img, const AffinityModel& model) : img_(&img), model_(&model) {
  bool need_pairs = false;
  std::map<int, std::vector<int>> skew_by_side;
  for (int m = 0; m < model.object_count(); ++m) {
    const ObjectAffinity& o = model.objects[static_cast<std::size_t>(m)];
    if (o.kind == AffinityKind::kGaussianAdaptive) need_pairs = true;
    if (o.kind == AffinityKind::kSkew) skew_by_side[o.scale.side].push_back(m);
  }
  divergence_.resize(static_cast<std::size_t>(model.object_count()));
  for (const auto& [side, objects] : skew_by_side) {
    for (int m : objects) {
      const SkewAffinityParams& p = model.objects[static_cast<std::size_t>(m)].skew;
      divergence_[static_cast<std::size_t>(m)] = divergence_field(img, p.seed_histogram, p.alpha, side);
    }
  }
  if (need_pairs) {
    const int w = img.width();
    const int h = img.height();
    const std::size_t stride = static_cast<std::size_t>(w) + 1;
    h_pairs_.assign(stride * (static_cast<std::size_t>(h) + 1), 0.0);
    v_pairs_.assign(stride * (static_cast<std::size_t>(h) + 1), 0.0);
    for (int y = 0; y < h; ++y) {
      double row_h = 0.0;
      double row_v = 0.0;
      for (int x = 0; x < w; ++x) {
        const double v = img.at(x, y);
        if (x + 1 < w) row_h += 0.5 * (v + img.at(x + 1, y));
        if (y + 1 < h) row_v += 0.5 * (v + img.at(x, y + 1));
        const std::size_t at = (static_cast<std::size_t>(y) + 1) * stride + static_cast<std::size_t>(x) + 1;
        h_pairs_[at] = h_pairs_[at - stride] + row_h;
        v_pairs_[at] = v_pairs_[at - stride] + row_v;
      }
    }
  }
}

double BoundAffinity::pair_union_mean(std::size_t c, std::size_t d, int halfwidth) const {
  const int w = img_->width();
  const int h = img_->height();
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  const int cx = static_cast<int>(c % static_cast<std::size_t>(w));
  const int cy = static_cast<int>(c / static_cast<std::size_t>(w));
  const int dx = static_cast<int>(d % static_cast<std::size_t>(w));
  const int dy = static_cast<int>(d / static_cast<std::size_t>(w));
  const int x0 = std::max(0, std::min(cx, dx) - halfwidth);
  const int y0 = std::max(0, std::min(cy, dy) - halfwidth);
  const int x1 = std::min(w - 1, std::max(cx, dx) + halfwidth);
  const int y1 = std::min(h - 1, std::max(cy, dy) + halfwidth);
  // Sum over columns [a, b] and rows [p, q] of an integral image; empty ranges give 0.
  auto box = [&](const std::vector<double>& ii, int a, int b, int p, int q) {
    if (b < a || q < p) return 0.0;
    auto at = [&](int x, int y) { return ii[static_cast<std::size_t>(y) * stride + static_cast<std::size_t>(x)]; };
    return at(b + 1, q + 1) - at(a, q + 1) - at(b + 1, p) + at(a, p);
  };
  const double sum = box(h_pairs_, x0, x1 - 1, y0, y1) + box(v_pairs_, x0, x1, y0, y1 - 1);
  const double count = static_cast<double>(x1 - x0) * (y1 - y0 + 1) + static_cast<double>(x1 - x0 + 1) * (y1 - y0);
  return sum / count;
}

double BoundAffinity::value(int object, std::size_t c, std::size_t d) const {
  const ObjectAffinity& o = model_->objects[static_cast<std::size_t>(object - 1)];
  const std::span<const double> px = img_->data();
  switch (o.kind) {
    case AffinityKind::kGaussian: {
      const double vc = px[c];
      const double vd = px[d];
      return 0.5 * (rho(0.5 * (vc + vd), o.gaussian.g, o.gaussian.h) + rho(std::abs(vc - vd), o.gaussian.a, o.gaussian.b));
    }
    case AffinityKind::kGaussianAdaptive: {
      const double g = 0.5 * (px[c] + px[d]);
      const double x = pair_union_mean(c, d, o.scale.halfwidth());
      return 0.5 * (rho(g, o.gaussian.g, o.gaussian.h) + rho(x, o.window.mean, o.window.std));
    }
    case AffinityKind::kSkew: {
      const std::vector<double>& field = divergence_[static_cast<std::size_t>(object - 1)];
      return std::exp(-0.5 * (field[c] + field[d]) / o.skew.div_scale);
    }
  }
  return 0.0;
}

}  // namespace fuzzyseg
