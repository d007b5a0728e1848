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

#include "fuzzyseg/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/evalbench.hpp"
#include "fuzzyseg/image_io.hpp"

namespace fuzzyseg {

namespace {

using nlohmann::json;

enum class JobStatus { kRunning, kDone, kFailed };

const char* status_name(JobStatus s) {
  switch (s) {
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "failed";
}

struct Revision {
  SeedSpec seeds;
  PipelineConfig config;
  JobStatus status = JobStatus::kRunning;
  std::string error;
  json bundle;  // filled when done
};

struct Session {
  std::string id;
  std::shared_ptr<const GrayImage> image;
  std::vector<std::shared_ptr<Revision>> revisions;
  bool running = false;
};

std::string base64(const Bytes& bytes) { return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end())); }

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}});
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

bool is_seed_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kOutOfRange:
    case ErrorCode::kConflictingSeeds:
    case ErrorCode::kEmptySeeds:
    case ErrorCode::kBadObjectId:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kBadK:
      return true;
    default:
      return false;
  }
}

json make_bundle(std::size_t index, const PipelineResult& r) {
  const Semisegmentation& seg = r.segmentation;
  json maps = json::array();
  for (int m = 1; m <= seg.object_count(); ++m) maps.push_back(base64(encode_png(connectedness_image(seg, m))));
  return json{{"revision", index},
              {"status", "done"},
              {"width", seg.width()},
              {"height", seg.height()},
              {"objects", seg.object_count()},
              {"segmentation_complete", seg.is_segmentation()},
              {"scales", scales_to_json(r.model)},
              {"seeds", seeds_to_json(r.seeds)},
              {"crisp_png", base64(encode_label_png(crisp_labels(seg, CrispOptions{true})))},
              {"render_png", base64(encode_rgb_png(render_connectedness(seg)))},
              {"connectedness_png", maps},
              {"timing", {{"seconds", r.seconds}}}};
}

}  // namespace

ServiceOptions with_env_overrides(ServiceOptions options) {
  if (const char* env = std::getenv("FUZZYSEG_MAX_PIXELS")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) options.max_pixels = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, std::string("FUZZYSEG_MAX_PIXELS is not a number: ") + env);
    }
  }
  return options;
}

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::mutex mu;
  std::condition_variable idle_cv;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<std::thread> jobs;
  int running_jobs = 0;
  std::mt19937_64 id_rng{std::random_device{}()};

  explicit Impl(ServiceOptions o) : options(std::move(o)) { routes(); }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::string fresh_id() {
    static const char* hex = "0123456789abcdef";
    std::string id;
    do {
      id.clear();
      std::uint64_t v = id_rng();
      for (int i = 0; i < 16; ++i, v >>= 4) id.push_back(hex[v & 15]);
    } while (sessions.count(id));
    return id;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, json{{"status", "ok"}});
    });
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      info(req, res);
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
      image(req, res);
    });
    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/segment)", [this](const httplib::Request& req, httplib::Response& res) {
      segment_job(req, res);
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
      status(req, res);
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/revisions)", [this](const httplib::Request& req, httplib::Response& res) {
      revisions(req, res);
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
      result(req, res);
    });
    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/autoseed)", [this](const httplib::Request& req, httplib::Response& res) {
      autoseed(req, res);
    });
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    std::string id;
    if (req.has_param("id")) {
      id = req.get_param_value("id");
      if (!valid_id(id)) return reply_error(res, 400, "session id must match [A-Za-z0-9_-]{1,64}");
      if (find(id)) return reply_error(res, 409, "session '" + id + "' already exists");
    }
    std::shared_ptr<GrayImage> img;
    try {
      const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
      img = std::make_shared<GrayImage>(decode_image(std::span<const std::uint8_t>(data, req.body.size())));
    } catch (const Error& e) {
      return reply_error(res, 400, e.what());
    }
    if (img->size() > options.max_pixels) {
      return reply_error(res, 413, "image has " + std::to_string(img->size()) + " pixels, limit is " +
                                       std::to_string(options.max_pixels));
    }
    std::lock_guard<std::mutex> lock(mu);
    if (id.empty()) {
      id = fresh_id();
    } else if (sessions.count(id)) {
      return reply_error(res, 409, "session '" + id + "' already exists");
    }
    auto s = std::make_shared<Session>();
    s->id = id;
    s->image = img;
    sessions[id] = s;
    reply(res, 201, json{{"id", id}, {"width", img->width()}, {"height", img->height()}});
  }

  json status_json(const Session& s) {
    json j{{"id", s.id}, {"revisions", s.revisions.size()}};
    if (s.revisions.empty()) {
      j["status"] = "idle";
    } else {
      const Revision& r = *s.revisions.back();
      j["status"] = status_name(r.status);
      j["latest"] = s.revisions.size() - 1;
      if (r.status == JobStatus::kFailed) j["error"] = r.error;
    }
    return j;
  }

  void info(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    std::lock_guard<std::mutex> lock(mu);
    json j = status_json(*s);
    j["width"] = s->image->width();
    j["height"] = s->image->height();
    reply(res, 200, j);
  }

  void image(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    const Bytes png = encode_png(*s->image);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void status(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    std::lock_guard<std::mutex> lock(mu);
    reply(res, 200, status_json(*s));
  }

  void revisions(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    std::lock_guard<std::mutex> lock(mu);
    json list = json::array();
    for (std::size_t i = 0; i < s->revisions.size(); ++i) {
      const Revision& r = *s->revisions[i];
      list.push_back({{"revision", i}, {"status", status_name(r.status)}, {"seeds", seeds_to_json(r.seeds)},
                      {"config", to_json(r.config)}});
    }
    reply(res, 200, json{{"id", s->id}, {"revisions", list}});
  }

  static std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) return json::object();
    try {
      json j = json::parse(req.body);
      if (!j.is_object()) {
        reply_error(res, 400, "request body must be a JSON object");
        return std::nullopt;
      }
      return j;
    } catch (const json::parse_error& e) {
      reply_error(res, 400, std::string("malformed JSON: ") + e.what());
      return std::nullopt;
    }
  }

  void segment_job(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    const auto body = parse_body(req, res);
    if (!body) return;
    SeedSpec seeds;
    PipelineConfig config = options.defaults;
    try {
      seeds = seeds_from_json(body->contains("seeds") ? (*body)["seeds"] : *body);
      if (body->contains("config")) config = pipeline_config_from_json((*body)["config"], config);
      validate_seeds(seeds, s->image->width(), s->image->height());
    } catch (const Error& e) {
      return reply_error(res, is_seed_error(e.code()) ? 422 : 400, e.what());
    }
    auto rev = std::make_shared<Revision>();
    rev->seeds = normalized(seeds);
    rev->config = config;
    std::size_t index = 0;
    {
      std::lock_guard<std::mutex> lock(mu);
      if (s->running) return reply(res, 409, json{{"error", "a job is already running"}, {"status", "running"}});
      s->running = true;
      s->revisions.push_back(rev);
      index = s->revisions.size() - 1;
      ++running_jobs;
      jobs.emplace_back([this, s, rev, index] { run_job(s, rev, index); });
    }
    reply(res, 202, json{{"revision", index}, {"status", "running"}});
  }

  void run_job(std::shared_ptr<Session> s, std::shared_ptr<Revision> rev, std::size_t index) {
    json bundle;
    std::string error;
    try {
      bundle = make_bundle(index, run_manual(*s->image, rev->seeds, rev->config));
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard<std::mutex> lock(mu);
    if (error.empty()) {
      rev->bundle = std::move(bundle);
      rev->status = JobStatus::kDone;
    } else {
      rev->error = error;
      rev->status = JobStatus::kFailed;
    }
    s->running = false;
    --running_jobs;
    idle_cv.notify_all();
  }

  void result(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    std::lock_guard<std::mutex> lock(mu);
    if (s->revisions.empty()) return reply_error(res, 404, "session has no revisions");
    std::size_t index = s->revisions.size() - 1;
    if (req.has_param("rev")) {
      const std::string v = req.get_param_value("rev");
      if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
          v.size() > 9 || std::stoul(v) >= s->revisions.size()) {
        return reply_error(res, 404, "no revision '" + v + "'");
      }
      index = std::stoul(v);
    }
    const Revision& r = *s->revisions[index];
    switch (r.status) {
      case JobStatus::kRunning:
        return reply(res, 409, json{{"revision", index}, {"status", "running"}});
      case JobStatus::kFailed:
        return reply(res, 500, json{{"revision", index}, {"status", "failed"}, {"error", r.error}});
      case JobStatus::kDone:
        return reply(res, 200, r.bundle);
    }
  }

  void autoseed(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return reply_error(res, 404, "no such session");
    const auto body = parse_body(req, res);
    if (!body) return;
    {
      std::lock_guard<std::mutex> lock(mu);
      if (s->running) return reply(res, 409, json{{"error", "a job is already running"}, {"status", "running"}});
    }
    try {
      if (!body->contains("k") || !(*body)["k"].is_number_integer()) {
        throw Error(ErrorCode::kBadK, "body needs an integer \"k\"");
      }
      PipelineConfig config = options.defaults;
      if (body->contains("config")) config = pipeline_config_from_json((*body)["config"], config);
      const SeedProposal p = propose_seeds(*s->image, (*body)["k"].get<int>(), config.autoseed);
      reply(res, 200, json{{"seeds", seeds_to_json(p.seeds)}, {"diagnostics", diagnostics_json(p)}});
    } catch (const Error& e) {
      reply_error(res, e.code() == ErrorCode::kBadK || is_seed_error(e.code()) ? 422 : 500, e.what());
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() {
  stop();
  std::vector<std::thread> jobs;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    jobs.swap(impl_->jobs);
  }
  for (auto& t : jobs) t.join();
}

int Service::bind() {
  if (impl_->options.port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
  return impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_idle() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->idle_cv.wait(lock, [this] { return impl_->running_jobs == 0; });
}

}  // namespace fuzzyseg
