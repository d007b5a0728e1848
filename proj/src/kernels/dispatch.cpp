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

#include <cstdlib>
#include <string>

#include "fuzzyseg/kernels/kernels.hpp"

namespace fuzzyseg::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* env = std::getenv("FUZZYSEG_SIMD");
  const std::string wanted = env != nullptr ? env : "";
  if (wanted == "scalar") return detail::scalar_table();
  if (wanted == "avx2" && table(Isa::kAvx2) != nullptr) return *table(Isa::kAvx2);
  if (wanted == "neon" && table(Isa::kNeon) != nullptr) return *table(Isa::kNeon);
  if (const KernelTable* t = table(Isa::kAvx2)) return *t;
  if (const KernelTable* t = table(Isa::kNeon)) return *t;
  return detail::scalar_table();
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable* table(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return &detail::scalar_table();
    case Isa::kAvx2: {
      static const bool ok = cpu_has_avx2();
      return ok ? detail::avx2_table() : nullptr;
    }
    case Isa::kNeon: return detail::neon_table();
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (table(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace fuzzyseg::kernels
