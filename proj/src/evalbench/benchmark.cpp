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

#include "fuzzyseg/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/image_io.hpp"

namespace fuzzyseg {

namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

bool safe_name(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

Experiment parse_experiment(const nlohmann::json& j, const std::filesystem::path& base, std::size_t index) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "each experiment must be a JSON object");
  Experiment e;
  try {
    e.name = j.value("name", "experiment" + std::to_string(index + 1));
    if (!safe_name(e.name)) {
      throw Error(ErrorCode::kInvalidConfig, "experiment name '" + e.name + "' must use [A-Za-z0-9._-]");
    }
    if (j.contains("mosaic")) {
      const auto& m = j["mosaic"];
      if (m.is_string()) {
        const std::filesystem::path path = resolve(m.get<std::string>(), base);
        const Bytes bytes = read_file(path);
        nlohmann::json layout;
        try {
          layout = nlohmann::json::parse(bytes.begin(), bytes.end());
        } catch (const nlohmann::json::parse_error& err) {
          throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + err.what());
        }
        e.layout = layout_from_json(layout, path.parent_path());
      } else {
        e.layout = layout_from_json(m, base);
      }
    }
    if (j.contains("image")) e.image = resolve(j["image"].get<std::string>(), base);
    if (j.contains("ground_truth")) e.ground_truth = resolve(j["ground_truth"].get<std::string>(), base);
    if (e.layout.has_value() == (e.image.has_value() || e.ground_truth.has_value())) {
      throw Error(ErrorCode::kInvalidConfig, "experiment '" + e.name + "' needs either mosaic or image + ground_truth");
    }
    if (!e.layout && !(e.image && e.ground_truth)) {
      throw Error(ErrorCode::kInvalidConfig, "experiment '" + e.name + "' needs both image and ground_truth");
    }
    const std::string mode = j.value("mode", "auto");
    if (mode != "auto" && mode != "manual") {
      throw Error(ErrorCode::kInvalidConfig, "mode must be auto or manual, got '" + mode + "'");
    }
    e.automatic = mode == "auto";
    e.k = j.value("k", 0);
    if (j.contains("seeds")) e.seeds = seeds_from_json(j["seeds"]);
    if (!e.automatic && !e.seeds) {
      throw Error(ErrorCode::kInvalidConfig, "manual experiment '" + e.name + "' needs seeds");
    }
    if (j.contains("config")) e.config = pipeline_config_from_json(j["config"]);
    if (j.contains("rng_seed")) e.config.autoseed.rng_seed = j["rng_seed"].get<std::uint64_t>();
    if (j.contains("affinities")) {
      for (const auto& a : j["affinities"]) e.affinities.push_back(parse_affinity_kind(a.get<std::string>()));
    }
    if (e.affinities.empty()) e.affinities.push_back(e.config.affinity.kind);
  } catch (const nlohmann::json::exception& err) {
    throw Error(ErrorCode::kInvalidConfig, std::string("experiment: ") + err.what());
  }
  return e;
}

struct LoadedInput {
  GrayImage image;
  LabelMap truth;
};

LoadedInput load_input(const Experiment& e) {
  if (e.layout) {
    Mosaic m = compose_mosaic(load_tiles(*e.layout), *e.layout);
    return LoadedInput{std::move(m.image), std::move(m.labels)};
  }
  LoadedInput in{load_image(*e.image), load_label_map(*e.ground_truth)};
  if (in.image.width() != in.truth.width() || in.image.height() != in.truth.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "image and ground truth of '" + e.name + "' differ in size");
  }
  return in;
}

ScoreReport run_experiment(const Experiment& e, const LoadedInput& in, const std::filesystem::path& out_dir) {
  ScoreReport report;
  report.name = e.name;
  report.width = in.image.width();
  report.height = in.image.height();
  report.config = to_json(e.config);
  report.config["mode"] = e.automatic ? "auto" : "manual";
  int k = e.k;
  if (k == 0) k = static_cast<int>(score(in.truth, in.truth).sizes.size());
  if (e.automatic) report.config["k"] = k;

  for (AffinityKind kind : e.affinities) {
    PipelineConfig cfg = e.config;
    cfg.affinity.kind = kind;
    const PipelineResult r = e.automatic ? run_auto(in.image, k, cfg) : run_manual(in.image, *e.seeds, cfg);
    const LabelMap crisp = crisp_labels(r.segmentation, CrispOptions{true});
    PipelineScore s;
    s.affinity = kind;
    s.seconds = r.seconds;
    if (e.automatic) {
      s.matching = match_labels(crisp, in.truth);
    } else {
      for (int m = 1; m <= r.segmentation.object_count(); ++m) s.matching[m] = m;
    }
    const LabelMap matched = relabel(crisp, s.matching);
    s.dice = score(matched, in.truth);
    s.scales = scales_to_json(r.model);
    s.seeds = seeds_to_json(r.seeds);
    const std::filesystem::path maps = out_dir / e.name / std::string(to_string(kind));
    std::filesystem::create_directories(maps);
    write_file_atomic(maps / "render.png", encode_rgb_png(render_connectedness(r.segmentation)));
    write_file_atomic(maps / "crisp.png", encode_label_png(matched));
    report.pipelines.push_back(std::move(s));
  }
  report.report_path = out_dir / (e.name + ".json");
  write_text_atomic(report.report_path, to_json(report).dump(2) + "\n");
  return report;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "experiment spec must be a JSON object");
  ExperimentSpec spec;
  spec.output_dir = resolve(j.value("output_dir", std::string("bench_out")), base_dir);
  if (j.contains("experiments")) {
    if (!j["experiments"].is_array()) throw Error(ErrorCode::kInvalidConfig, "\"experiments\" must be an array");
    for (const auto& e : j["experiments"]) spec.experiments.push_back(parse_experiment(e, base_dir, spec.experiments.size()));
  } else if (j.contains("mosaic") || j.contains("image")) {
    spec.experiments.push_back(parse_experiment(j, base_dir, 0));
  }
  if (spec.experiments.empty()) throw Error(ErrorCode::kInvalidConfig, "experiment spec lists no experiments");
  std::set<std::string> names;
  for (const auto& e : spec.experiments) {
    if (!names.insert(e.name).second) throw Error(ErrorCode::kInvalidConfig, "duplicate experiment name '" + e.name + "'");
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return parse_experiment_spec(j, path.parent_path());
}

nlohmann::json to_json(const ScoreReport& report) {
  nlohmann::json pipelines = nlohmann::json::array();
  for (const PipelineScore& s : report.pipelines) {
    nlohmann::json per_object = nlohmann::json::object();
    for (const auto& [label, d] : s.dice.per_object) {
      per_object[std::to_string(label)] = {{"dice", d}, {"size", s.dice.sizes.at(label)}};
    }
    nlohmann::json matching = nlohmann::json::object();
    for (const auto& [p, g] : s.matching) matching[std::to_string(p)] = g;
    pipelines.push_back({{"affinity", std::string(to_string(s.affinity))},
                         {"weighted_dice", s.dice.weighted},
                         {"objects", per_object},
                         {"matching", matching},
                         {"seconds", s.seconds},
                         {"scales", s.scales},
                         {"seeds", s.seeds}});
  }
  return {{"name", report.name},
          {"width", report.width},
          {"height", report.height},
          {"config", report.config},
          {"pipelines", pipelines}};
}

std::vector<ScoreReport> run_benchmark(const ExperimentSpec& spec, int jobs) {
  if (jobs < 1) throw Error(ErrorCode::kInvalidConfig, "--jobs must be >= 1");
  std::vector<LoadedInput> inputs;
  inputs.reserve(spec.experiments.size());
  for (const Experiment& e : spec.experiments) inputs.push_back(load_input(e));

  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + spec.output_dir.string() + ": " + ec.message());

  std::vector<ScoreReport> reports(spec.experiments.size());
  std::vector<std::exception_ptr> errors(spec.experiments.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.experiments.size(); i = next++) {
      try {
        reports[i] = run_experiment(spec.experiments[i], inputs[i], spec.output_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), spec.experiments.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return reports;
}

std::string format_score_table(const std::vector<ScoreReport>& reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %-18s %10s %10s\n", "experiment", "affinity", "dice", "time[s]");
  out += line;
  for (const ScoreReport& r : reports) {
    for (const PipelineScore& s : r.pipelines) {
      std::snprintf(line, sizeof line, "%-20s %-18s %10.3f %10.2f\n", r.name.c_str(),
                    std::string(to_string(s.affinity)).c_str(), s.dice.weighted, s.seconds);
      out += line;
    }
  }
  return out;
}

}  // namespace fuzzyseg
