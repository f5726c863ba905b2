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

#include "merakit/density_matrix.hpp"
#include "merakit/local_operator.hpp"
#include "merakit/mera.hpp"

namespace merakit {

// Exact reduced density matrices through the causal cone: only the gates
// whose light cone touches the target wires are ever contracted, so the
// cost per layer is bounded by a constant for small targets.

struct ConeStep {
  std::vector<int> u_gates;       // layer-local disentangler indices
  std::vector<int> active_wires;  // union of their wire pairs, ascending
  std::vector<int> coarse_wires;  // wires feeding those isometries, ascending
};

// Which gates and wires matter when tracking target_wires through one
// layer. Pure set arithmetic on the brick pattern.
ConeStep cone_step(int n_wires, const std::vector<int>& target_wires);

// Cone wire sets per level: entry 0 is the sorted sites, entry k the cone
// wires at level k, up to the two wires under the top tensor.
std::vector<std::vector<int>> cone_levels(int n_sites,
                                          const std::vector<int>& sites);
std::vector<std::vector<int>> cone_of(const Mera& m,
                                      const std::vector<int>& sites);

struct ConeSlice {
  int level = 0;
  std::vector<int> wires;  // ascending
  DensityMatrix sigma;
};

// One generating step: from the state on the cone wires at level
// layer_index + 1 down to the state on target_wires at level layer_index.
// `above` must sit exactly on cone_step(...).coarse_wires.
ConeSlice descend_step(const Mera& m, int layer_index, const ConeSlice& above,
                       const std::vector<int>& target_wires);

struct RdmOptions {
  int max_sites = 4;                  // kept wires in the result
  int max_cone_wires = 8;             // widest target set at any level
  std::int64_t max_matrix_dim = 4096; // largest intermediate matrix side
};

// Reduced density matrix of the physical sites (ascending in the result).
DensityMatrix rdm(const Mera& m, const std::vector<int>& sites,
                  const RdmOptions& options = {});

// Same, for wires of an inner level (level n_layers() addresses the two
// wires under the top tensor).
DensityMatrix rdm_at_level(const Mera& m, int level,
                           const std::vector<int>& wires,
                           const RdmOptions& options = {});

cplx expect_local(const Mera& m, const LocalOperator& op,
                  const RdmOptions& options = {});

// <a_{s1} b_{s2}>, raw (not connected), via the merged two-site cone.
cplx correlator(const Mera& m, const Eigen::MatrixXcd& a,
                const Eigen::MatrixXcd& b, int s1, int s2,
                const RdmOptions& options = {});

}  // namespace merakit
