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

#include "merakit/tensor.hpp"

namespace merakit {

// Density matrix over an ordered list of subsystems. The matrix is indexed
// row-major over the subsystem dims (first subsystem slowest).
//
// Construction checks Hermiticity and unit trace (cheap); the full
// positive-semidefiniteness check runs in validate(), which public entry
// points call on their results.
class DensityMatrix {
 public:
  DensityMatrix(std::vector<int> dims, Eigen::MatrixXcd matrix,
                double tol = 1e-10);

  static DensityMatrix pure(const std::vector<int>& dims,
                            const Eigen::VectorXcd& amplitudes,
                            double tol = 1e-10);

  const std::vector<int>& dims() const { return dims_; }
  int n_subsystems() const { return static_cast<int>(dims_.size()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::Index dimension() const { return matrix_.rows(); }

  // Throws ValidationError if any eigenvalue < -tol; eigenvalues within
  // [-tol, 0) are treated as roundoff.
  void validate(double tol = 1e-10) const;

 private:
  std::vector<int> dims_;
  Eigen::MatrixXcd matrix_;
};

// Keeps the listed subsystems (indices into rho.dims(), strictly increasing)
// and traces out the rest. Empty keep list gives the 1x1 trace.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

// Entropy in bits: -sum p log2 p over eigenvalues. Eigenvalues in
// [-1e-10, 0) clamp to 0; below that throws ValidationError.
double von_neumann_entropy(const DensityMatrix& rho);

}  // namespace merakit
