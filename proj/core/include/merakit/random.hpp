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

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "merakit/tensor.hpp"

namespace merakit {

// Deterministic per-slot seed derivation. Same (base, a, b, c) always gives
// the same stream regardless of platform.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c);

// Haar-ish random isometry: rows >= cols, V^dag V = I_cols exactly (up to
// float roundoff). Deterministic in `seed`. Phase-fixed so the result is a
// pure function of the seed (no QR sign ambiguity).
Eigen::MatrixXcd random_isometry(int rows, int cols, std::uint64_t seed);

// Random unit vector of the given dimension, phase-fixed, deterministic.
std::vector<cplx> random_unit_vector(int dim, std::uint64_t seed);

}  // namespace merakit
