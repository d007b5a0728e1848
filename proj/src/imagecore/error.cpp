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

#include "fuzzyseg/error.hpp"

namespace fuzzyseg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kPatchTooLarge: return "PatchTooLarge";
    case ErrorCode::kLayoutGap: return "LayoutGap";
    case ErrorCode::kLayoutOverlap: return "LayoutOverlap";
    case ErrorCode::kNonPositiveStd: return "NonPositiveStd";
    case ErrorCode::kUndefinedDivergence: return "UndefinedDivergence";
    case ErrorCode::kNoAdjacentPairs: return "NoAdjacentPairs";
    case ErrorCode::kNoSeeds: return "NoSeeds";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kConflictingSeeds: return "ConflictingSeeds";
    case ErrorCode::kEmptySeeds: return "EmptySeeds";
    case ErrorCode::kBadObjectId: return "BadObjectId";
    case ErrorCode::kUnsegmentedSpel: return "UnsegmentedSpel";
    case ErrorCode::kEmptyPatch: return "EmptyPatch";
    case ErrorCode::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::kBadK: return "BadK";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kSamplingExhausted: return "SamplingExhausted";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kPaletteTooSmall: return "PaletteTooSmall";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConflictingSeeds:
    case ErrorCode::kEmptySeeds:
    case ErrorCode::kNoSeeds:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kBadObjectId:
    case ErrorCode::kBadK:
    case ErrorCode::kPatchTooLarge:
    case ErrorCode::kLayoutGap:
    case ErrorCode::kLayoutOverlap:
    case ErrorCode::kInvalidConfig:
      return true;
    default:
      return false;
  }
}

}  // namespace fuzzyseg
