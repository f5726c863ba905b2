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
#include <string>
#include <vector>

#include "merakit/density_matrix.hpp"
#include "merakit/mera.hpp"

namespace merakit {

// Brute-force reference path: materializes the full state vector and
// computes reductions directly from it. Exponential in n_sites; guarded.

struct StateVector {
  int n_sites = 0;
  int site_dim = 0;
  std::vector<cplx> amplitudes;  // row-major over sites, site 0 slowest
};

// One input vector per ancilla leg of the circuit: every isometry slot has
// one leg, the top has two. Defaults (basis state 0 everywhere) reproduce
// the stored network exactly.
struct CircuitInputs {
  // [layer][slot], each of the layer's ancilla dim chi_in^2 / chi_out
  std::vector<std::vector<std::vector<cplx>>> isometry_inputs;
  std::vector<cplx> top_input1, top_input2;  // each of the top wire dim

  static CircuitInputs vacuum(const Mera& m);
};

// Top-down contraction of the network. Any level whose state space would
// exceed 2^20 amplitudes raises CostGuardError. Non-vacuum inputs need the
// parent unitaries (CapabilityError otherwise).
StateVector full_state(const Mera& m);
StateVector full_state(const Mera& m, const CircuitInputs& inputs);

// Reduced density matrix over the given (distinct) sites; result subsystems
// are in ascending site order.
DensityMatrix oracle_rdm(const StateVector& psi, const std::vector<int>& sites);

// <psi| op |psi> with op's subsystem order matching `sites` as given.
cplx oracle_expect(const StateVector& psi, const Eigen::MatrixXcd& op,
                   const std::vector<int>& sites);

// <psi| a_{s1} b_{s2} |psi>, s1 != s2.
cplx oracle_correlator(const StateVector& psi, const Eigen::MatrixXcd& a,
                       const Eigen::MatrixXcd& b, int s1, int s2);

// <a|b>.
cplx overlap(const StateVector& a, const StateVector& b);

// <Psi_{inputs1} | Psi_{inputs2}> for two runs of one circuit. Because the
// circuit is an isometry from the input slots to the sites, this equals the
// product of the per-slot input overlaps. The networks must agree gate by
// gate (within 1e-12) — including parent unitaries where both carry them —
// or an ArgumentError is raised; guards and capability rules as full_state.
cplx overlap(const Mera& m1, const CircuitInputs& inputs1, const Mera& m2,
             const CircuitInputs& inputs2);

std::string state_to_json(const StateVector& psi);
StateVector state_from_json(const std::string& text);

}  // namespace merakit
