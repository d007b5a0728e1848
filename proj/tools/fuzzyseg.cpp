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

// fuzzyseg: command-line front end.
//
//   fuzzyseg segment --image IMG --seeds SEEDS.json --out DIR
//   fuzzyseg autoseg --image IMG --k 5 --out DIR --rng-seed 7
//   fuzzyseg scale   --image IMG --seeds SEEDS.json --mode skew
//   fuzzyseg bench   --spec EXPERIMENTS.json --jobs 2
//   fuzzyseg serve   --port 8080 --static-dir webui/
//   fuzzyseg synth   --layout LAYOUT.json --image OUT.png --labels GT.png
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuzzyseg/benchmark.hpp"
#include "fuzzyseg/error.hpp"
#include "fuzzyseg/image_io.hpp"
#include "fuzzyseg/mosaic.hpp"
#include "fuzzyseg/pipeline.hpp"
#include "fuzzyseg/service.hpp"

namespace fs = std::filesystem;
using fuzzyseg::Error;
using fuzzyseg::ErrorCode;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Values as parsed from the command line; CLI11 options record whether they
// were given so that explicit flags beat --config entries.
struct Flags {
  std::string config_path;
  std::string image;
  std::string seeds;
  std::string out;
  int k = 0;
  std::string affinity;
  double alpha = 0.0;
  double mean_thresh = 0.0;
  double std_thresh = 0.0;
  double div_thresh = 0.0;
  int max_scale = 0;
  int patch = 0;
  double lambda = 0.0;
  std::uint64_t rng_seed = 0;
  int samples_per_class = 0;
  double sample_variance = 0.0;
  int kmeans_restarts = 0;
  std::string mode = "skew";
  std::string spec;
  int jobs = 1;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string layout;
  std::string labels;
};

json read_json(const fs::path& path) {
  const fuzzyseg::Bytes bytes = fuzzyseg::read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

struct Resolved {
  json values = json::object();  // flat: pipeline keys plus image/seeds/out/k
};

void add_pipeline_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--affinity", f.affinity, "gaussian | gaussian-adaptive | skew");
  cmd->add_option("--alpha", f.alpha, "skew divergence mixing weight in (0, 1)");
  cmd->add_option("--mean-thresh", f.mean_thresh, "scale search: mean-of-pairs threshold");
  cmd->add_option("--std-thresh", f.std_thresh, "scale search: std-of-pairs threshold");
  cmd->add_option("--div-thresh", f.div_thresh, "scale search: divergence threshold");
  cmd->add_option("--max-scale", f.max_scale, "largest window side (odd)");
}

void add_autoseed_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--patch", f.patch, "patch side in pixels");
  cmd->add_option("--lambda", f.lambda, "weight of the spatial term in patch distances");
  cmd->add_option("--rng-seed", f.rng_seed, "seed for clustering and seed sampling");
  cmd->add_option("--samples-per-class", f.samples_per_class, "seed points drawn per class");
  cmd->add_option("--sample-variance", f.sample_variance, "variance of the seed sampling normal");
  cmd->add_option("--kmeans-restarts", f.kmeans_restarts, "k-means++ restarts");
}

// Starts from --config (if any), then overlays every flag given explicitly.
Resolved resolve(CLI::App* cmd, const Flags& f) {
  Resolved r;
  if (!f.config_path.empty()) {
    r.values = read_json(f.config_path);
    if (!r.values.is_object()) throw Error(ErrorCode::kInvalidConfig, "--config must hold a JSON object");
  }
  auto given = [&](const char* name) {
    const CLI::Option* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--image")) r.values["image"] = f.image;
  if (given("--seeds")) r.values["seeds"] = f.seeds;
  if (given("--out")) r.values["out"] = f.out;
  if (given("--k")) r.values["k"] = f.k;
  if (given("--affinity")) r.values["affinity"] = f.affinity;
  if (given("--alpha")) r.values["alpha"] = f.alpha;
  if (given("--mean-thresh")) r.values["mean-thresh"] = f.mean_thresh;
  if (given("--std-thresh")) r.values["std-thresh"] = f.std_thresh;
  if (given("--div-thresh")) r.values["div-thresh"] = f.div_thresh;
  if (given("--max-scale")) r.values["max-scale"] = f.max_scale;
  if (given("--patch")) r.values["patch"] = f.patch;
  if (given("--lambda")) r.values["lambda"] = f.lambda;
  if (given("--rng-seed")) r.values["rng-seed"] = f.rng_seed;
  if (given("--samples-per-class")) r.values["samples-per-class"] = f.samples_per_class;
  if (given("--sample-variance")) r.values["sample-variance"] = f.sample_variance;
  if (given("--kmeans-restarts")) r.values["kmeans-restarts"] = f.kmeans_restarts;
  return r;
}

std::string require_string(const json& j, const char* key, const char* flag) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
    throw Error(ErrorCode::kInvalidConfig, std::string(flag) + " is required");
  }
  return j[key].get<std::string>();
}

// Writes the fully resolved configuration, defaults included.
void log_config(const fs::path& out, const std::string& command, const json& inputs,
                const fuzzyseg::PipelineConfig& cfg) {
  json all = fuzzyseg::to_json(cfg);
  all.update(inputs);
  all["command"] = command;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out.string() + ": " + ec.message());
  fuzzyseg::write_text_atomic(out / "config.json", all.dump(2) + "\n");
}

void print_scales(const fuzzyseg::AffinityModel& model) {
  for (const auto& o : model.objects) {
    std::printf("object %d: %s affinity, window %dx%d\n", o.object, std::string(fuzzyseg::to_string(o.kind)).c_str(),
                o.scale.side, o.scale.side);
  }
}

int cmd_segment(CLI::App* cmd, const Flags& f) {
  const Resolved r = resolve(cmd, f);
  const fuzzyseg::PipelineConfig cfg = fuzzyseg::pipeline_config_from_json(r.values);
  const std::string image_path = require_string(r.values, "image", "--image");
  const std::string seeds_path = require_string(r.values, "seeds", "--seeds");
  const fs::path out = require_string(r.values, "out", "--out");
  if (r.values.contains("k")) throw Error(ErrorCode::kInvalidConfig, "--k belongs to autoseg, not segment");
  const fuzzyseg::SeedSpec seeds = fuzzyseg::seeds_from_json(read_json(seeds_path));
  const fuzzyseg::GrayImage img = fuzzyseg::load_image(image_path);
  fuzzyseg::validate_seeds(seeds, img.width(), img.height());
  log_config(out, "segment", json{{"image", image_path}, {"seeds", seeds_path}, {"out", out.string()}}, cfg);
  const fuzzyseg::PipelineResult result = fuzzyseg::run_manual(img, seeds, cfg);
  fuzzyseg::write_outputs(out, result);
  print_scales(result.model);
  std::printf("segmented %dx%d image into %d objects in %.2f s -> %s\n", img.width(), img.height(),
              result.segmentation.object_count(), result.seconds, out.string().c_str());
  return kExitOk;
}

int cmd_autoseg(CLI::App* cmd, const Flags& f) {
  const Resolved r = resolve(cmd, f);
  const fuzzyseg::PipelineConfig cfg = fuzzyseg::pipeline_config_from_json(r.values);
  const std::string image_path = require_string(r.values, "image", "--image");
  const fs::path out = require_string(r.values, "out", "--out");
  if (r.values.contains("seeds")) throw Error(ErrorCode::kInvalidConfig, "--seeds belongs to segment, not autoseg");
  if (!r.values.contains("k") || !r.values["k"].is_number_integer()) {
    throw Error(ErrorCode::kInvalidConfig, "--k is required");
  }
  const int k = r.values["k"].get<int>();
  if (k < 2) throw Error(ErrorCode::kBadK, "--k must be >= 2, got " + std::to_string(k));
  const fuzzyseg::GrayImage img = fuzzyseg::load_image(image_path);
  log_config(out, "autoseg", json{{"image", image_path}, {"k", k}, {"out", out.string()}}, cfg);
  const fuzzyseg::PipelineResult result = fuzzyseg::run_auto(img, k, cfg);
  fuzzyseg::write_outputs(out, result);
  print_scales(result.model);
  std::printf("auto-segmented %dx%d image into %d classes (%zu seeds) in %.2f s -> %s\n", img.width(), img.height(),
              k, result.seeds.point_count(), result.seconds, out.string().c_str());
  return kExitOk;
}

int cmd_scale(CLI::App* cmd, const Flags& f) {
  const Resolved r = resolve(cmd, f);
  const fuzzyseg::PipelineConfig cfg = fuzzyseg::pipeline_config_from_json(r.values);
  const std::string image_path = require_string(r.values, "image", "--image");
  const std::string seeds_path = require_string(r.values, "seeds", "--seeds");
  if (f.mode != "gaussian" && f.mode != "skew") {
    throw Error(ErrorCode::kInvalidConfig, "--mode must be gaussian or skew");
  }
  const fuzzyseg::SeedSpec seeds = fuzzyseg::normalized(fuzzyseg::seeds_from_json(read_json(seeds_path)));
  const fuzzyseg::GrayImage img = fuzzyseg::load_image(image_path);
  fuzzyseg::validate_seeds(seeds, img.width(), img.height());
  const fuzzyseg::ScaleThresholds t{cfg.affinity.mean_thresh, cfg.affinity.std_thresh, cfg.affinity.div_thresh,
                                    cfg.affinity.alpha, cfg.affinity.max_scale};
  const auto mode = f.mode == "gaussian" ? fuzzyseg::ScaleMode::kGaussian : fuzzyseg::ScaleMode::kSkew;
  for (const auto& o : seeds.objects) {
    const auto region = fuzzyseg::dilate8(o.points, img.width(), img.height());
    const fuzzyseg::ScaleSelection sel = fuzzyseg::select_scale(img, region, mode, t);
    std::printf("object %d: selected side %d\n", o.id, sel.side);
    std::printf("  %5s %12s %12s %12s\n", "side", "mean_pairs", "std_pairs", "divergence");
    for (const auto& e : sel.trace) {
      std::printf("  %5d %12.6f %12.6f %12.6f\n", e.side, e.mean_pairs, e.std_pairs, e.divergence);
    }
  }
  return kExitOk;
}

int cmd_bench(const Flags& f) {
  if (f.spec.empty()) throw Error(ErrorCode::kInvalidConfig, "--spec is required");
  fuzzyseg::ExperimentSpec spec = fuzzyseg::load_experiment_spec(f.spec);
  if (!f.out.empty()) spec.output_dir = f.out;
  const auto reports = fuzzyseg::run_benchmark(spec, f.jobs);
  std::fputs(fuzzyseg::format_score_table(reports).c_str(), stdout);
  return kExitOk;
}

fuzzyseg::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

int cmd_serve(CLI::App* cmd, const Flags& f) {
  const Resolved r = resolve(cmd, f);
  fuzzyseg::ServiceOptions opts;
  opts.host = f.host;
  opts.port = f.port;
  if (!f.static_dir.empty()) opts.static_dir = f.static_dir;
  opts.defaults = fuzzyseg::pipeline_config_from_json(r.values);
  opts = fuzzyseg::with_env_overrides(opts);
  fuzzyseg::Service service(opts);
  const int port = service.bind();
  if (port < 0) throw Error(ErrorCode::kIoError, "cannot bind " + opts.host + ":" + std::to_string(opts.port));
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("listening on http://%s:%d\n", opts.host.c_str(), port);
  std::fflush(stdout);
  service.listen();
  g_service = nullptr;
  return kExitOk;
}

int cmd_synth(const Flags& f) {
  if (f.layout.empty() || f.image.empty()) throw Error(ErrorCode::kInvalidConfig, "--layout and --image are required");
  const fuzzyseg::MosaicLayout layout = fuzzyseg::layout_from_json(read_json(f.layout), fs::path(f.layout).parent_path());
  const fuzzyseg::Mosaic m = fuzzyseg::compose_mosaic(fuzzyseg::load_tiles(layout), layout);
  fuzzyseg::save_png(m.image, f.image);
  if (!f.labels.empty()) fuzzyseg::save_label_png(m.labels, f.labels);
  std::printf("wrote %dx%d mosaic with %d labels\n", m.image.width(), m.image.height(), m.labels.max_label());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-object fuzzy segmentation of textured images"};
  app.require_subcommand(1, 1);
  Flags f;

  auto* segment = app.add_subcommand("segment", "segment an image from clicked seeds");
  segment->add_option("--image", f.image, "PNG or PGM grayscale image");
  segment->add_option("--seeds", f.seeds, "seeds JSON");
  segment->add_option("--out", f.out, "output directory");
  segment->add_option("--k", f.k, "not accepted here (see autoseg)");
  segment->add_option("--config", f.config_path, "JSON file with defaults; explicit flags win");
  add_pipeline_flags(segment, f);

  auto* autoseg = app.add_subcommand("autoseg", "choose seeds automatically and segment");
  autoseg->add_option("--image", f.image, "PNG or PGM grayscale image");
  autoseg->add_option("--k", f.k, "number of classes (>= 2)");
  autoseg->add_option("--out", f.out, "output directory");
  autoseg->add_option("--seeds", f.seeds, "not accepted here (see segment)");
  autoseg->add_option("--config", f.config_path, "JSON file with defaults; explicit flags win");
  add_pipeline_flags(autoseg, f);
  add_autoseed_flags(autoseg, f);

  auto* scale = app.add_subcommand("scale", "print the window-size search for each object");
  scale->add_option("--image", f.image, "PNG or PGM grayscale image");
  scale->add_option("--seeds", f.seeds, "seeds JSON");
  scale->add_option("--mode", f.mode, "gaussian | skew");
  scale->add_option("--config", f.config_path, "JSON file with defaults; explicit flags win");
  add_pipeline_flags(scale, f);

  auto* bench = app.add_subcommand("bench", "run an experiment spec and score it");
  bench->add_option("--spec", f.spec, "experiment spec JSON");
  bench->add_option("--out", f.out, "override the spec's output directory");
  bench->add_option("--jobs", f.jobs, "experiments run in parallel");

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  serve->add_option("--host", f.host, "bind address");
  serve->add_option("--port", f.port, "port (0 picks a free one)");
  serve->add_option("--static-dir", f.static_dir, "directory served at /");
  serve->add_option("--config", f.config_path, "JSON file with default pipeline settings");
  add_pipeline_flags(serve, f);
  add_autoseed_flags(serve, f);

  auto* synth = app.add_subcommand("synth", "render a mosaic layout and its ground truth");
  synth->add_option("--layout", f.layout, "layout JSON");
  synth->add_option("--image", f.image, "output image PNG");
  synth->add_option("--labels", f.labels, "output ground-truth label PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (segment->parsed()) return cmd_segment(segment, f);
    if (autoseg->parsed()) return cmd_autoseg(autoseg, f);
    if (scale->parsed()) return cmd_scale(scale, f);
    if (bench->parsed()) return cmd_bench(f);
    if (serve->parsed()) return cmd_serve(serve, f);
    if (synth->parsed()) return cmd_synth(f);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return fuzzyseg::is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
