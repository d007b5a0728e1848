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

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "fuzzyseg/pipeline.hpp"

namespace fuzzyseg {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Largest accepted upload in pixels; FUZZYSEG_MAX_PIXELS overrides.
  std::size_t max_pixels = 4096 * 4096;
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> static_dir;
  /// Defaults for segment and autoseed requests; per-request config overrides.
  PipelineConfig defaults;
};

/// Reads FUZZYSEG_MAX_PIXELS into options.max_pixels when it is set.
ServiceOptions with_env_overrides(ServiceOptions options);

/// HTTP job service:
///
///   POST /sessions[?id=...]            raw PNG/PGM body          -> 201 {id}
///   GET  /sessions/{id}                                          -> session info
///   GET  /sessions/{id}/image                                    -> PNG
///   POST /sessions/{id}/segment        {seeds, config}           -> 202 {revision}
///   GET  /sessions/{id}/status                                   -> {status, revisions}
///   GET  /sessions/{id}/revisions                                -> seed history
///   GET  /sessions/{id}/result?rev=n                             -> result bundle
///   POST /sessions/{id}/autoseed       {k, config}               -> proposed seeds
///   GET  /healthz
///
/// Revisions are 0-based and append-only. Jobs run on background threads.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the socket and returns the port, or -1 on failure.
  int bind();
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();
  /// Blocks until no job is running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fuzzyseg
