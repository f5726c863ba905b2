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
#include <vector>

#include "merakit/cone.hpp"
#include "merakit/local_operator.hpp"
#include "merakit/mera.hpp"

namespace merakit {

// Operator flow: local operators carried upward through the layers, the
// exact adjoint of the cone's downward density-matrix flow, so that
// tr(descend(rho) * O) = tr(rho * ascend(O)) holds identically.

// One coarse-graining step of a local operator. The result lives on the
// cone slice one level up; its support never grows past the cone width.
LocalOperator ascend_operator(const Mera& m, const LocalOperator& op);

// A sum of few-wire Hermitian terms at one level.
struct HamiltonianTerms {
  int level = 0;
  std::vector<LocalOperator> terms;
};

// From nearest-neighbor terms at the sites, the whole coarse-grained
// sequence (entry tau = the operator sum at level tau, up to the top pair).
// Terms that land on the same support are merged.
std::vector<HamiltonianTerms> effective_hamiltonians(const Mera& m,
                                                     const HamiltonianTerms& h0);

// Sum of tr(rho_support * term) over the terms, via cone density matrices.
double hamiltonian_expectation(const Mera& m, const HamiltonianTerms& h,
                               const RdmOptions& options = {});

// The one-site coarse-graining channel of a (u, w) pair with uniform wire
// dimension chi, averaged over the two positions a site can take inside
// its isometry block, materialized as a chi^2 x chi^2 matrix over the
// matrix-unit basis (row-major vec: operator entry (i, j) at index
// i*chi + j).
Eigen::MatrixXcd scaling_superoperator(const Tensor& u, const Tensor& w);

// Same, from the shared tensors of a scale-invariant network.
Eigen::MatrixXcd scaling_superoperator(const Mera& m);

// -log2 |lambda_2|, where lambda_2 is the largest-magnitude eigenvalue
// after excluding the one closest to 1 (the unital fixed point).
double exponent_from_superoperator(const Eigen::MatrixXcd& s);

struct ExponentReport {
  double q_fit = 0.0;     // -slope of log2|C(r)| against log2 r
  double q_eig = 0.0;     // from the scaling superoperator spectrum
  double r_squared = 0.0; // quality of the power-law fit
  bool flagged = false;   // r_squared < 0.95: fit not trustworthy
  std::vector<double> log2_distance;
  std::vector<double> log2_abs_correlator;
};

// Two-point correlators of traceless-projected a, b at the given
// distances, fitted to a power law and compared with the superoperator
// spectrum. Requires a scale-invariant network.
ExponentReport correlation_exponent(const Mera& m, const Eigen::MatrixXcd& a,
                                    const Eigen::MatrixXcd& b,
                                    const std::vector<int>& distances,
                                    const RdmOptions& options = {});

enum class EntropyMethod {
  cone,    // block density matrix through the causal cone (short blocks)
  oracle,  // brute-force state vector (small networks, any block)
};

struct BlockEntropyReport {
  double entropy_bits = 0.0;
  double bound_bits = 0.0;  // log2(chi_max) * (4 + 2 * (ceil(log2 l) + 1))
};

// Von Neumann entropy of the contiguous block [start, start + length) mod
// n_sites, together with the coarse-graining entropy bound.
BlockEntropyReport block_entropy(const Mera& m, int start, int length,
                                 EntropyMethod method,
                                 const RdmOptions& options = {});

}  // namespace merakit
