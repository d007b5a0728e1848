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

// Shared helpers for the test binaries.

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "fuzzyseg/error.hpp"
#include "fuzzyseg/image.hpp"

namespace testutil {

inline fuzzyseg::GrayImage random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (double& x : v) x = u(rng);
  return fuzzyseg::GrayImage(w, h, std::move(v));
}

/// Random probability vector; `zero_fraction` of the bins are forced to 0.
template <std::size_t N>
std::array<double, N> random_distribution(std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, N> p{};
  double sum = 0.0;
  for (double& x : p) {
    x = u(rng) < zero_fraction ? 0.0 : u(rng);
    sum += x;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    sum = 1.0;
  }
  for (double& x : p) x /= sum;
  return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fuzzyseg_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs a shell command and captures its combined output.
inline CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// Adjusted Rand index between two labelings of the same points.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto pairs = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sum_rows = 0, sum_cols = 0;
  for (const auto& [key, v] : joint) index += pairs(v);
  for (const auto& [key, v] : rows) sum_rows += pairs(v);
  for (const auto& [key, v] : cols) sum_cols += pairs(v);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Points drawn around `k` well separated centers in `dim` dimensions.
struct Blobs {
  std::vector<double> coords;  // row-major, n x dim
  std::vector<int> truth;      // 1..k
};

inline Blobs make_blobs(int k, int per_blob, int dim, double separation, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Blobs out;
  for (int c = 0; c < k; ++c) {
    std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
    center[static_cast<std::size_t>(c % dim)] = separation * (1 + c / dim);
    for (int i = 0; i < per_blob; ++i) {
      for (int d = 0; d < dim; ++d) out.coords.push_back(center[static_cast<std::size_t>(d)] + noise(rng));
      out.truth.push_back(c + 1);
    }
  }
  return out;
}

}  // namespace testutil

// Requires doctest.h to be included first.
#define CHECK_ERROR(expr, expected)                         \
  do {                                                      \
    bool thrown_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const fuzzyseg::Error& e_) {                   \
      thrown_ = true;                                       \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());    \
    }                                                       \
    CHECK_MESSAGE(thrown_, "expected an error from " #expr); \
  } while (0)
