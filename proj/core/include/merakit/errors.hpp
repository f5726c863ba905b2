// Copyright 2026 The merakit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace merakit {

// Failure taxonomy used across the library. Every throwing code path picks
// exactly one of these so callers (and the CLI) can map failures to exit
// codes without string matching.

// Tensor shapes do not line up (contraction dims, matrix sizes, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller-supplied value is out of contract (bad axis list, bad site index,
// unsupported combination of options).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A network is structurally inconsistent (layer counts, wire chaining,
// mismatched slot shapes). Distinct from numeric constraint violations,
// which are reported through ValidationReport instead of thrown.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric invariant broken beyond tolerance (non-Hermitian density matrix,
// negative eigenvalue below the clamp window, non-unit trace).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Refusal to run a computation whose cost guard was exceeded (too many kept
// sites, state vector too large). Guards can be raised explicitly.
struct CostGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A serialized document cannot be accepted. The message names the offending
// field or tensor path.
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The operation needs data the object does not carry (e.g. parent unitaries
// for generalized circuit inputs).
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A fit or spectral analysis was asked to run on numerically dead input.
struct DegenerateSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace merakit
