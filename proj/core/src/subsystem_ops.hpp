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

// Index arithmetic on square matrices viewed as operators over an ordered
// list of subsystems (row-major, first subsystem slowest). Internal.

namespace merakit::internal {

// Subsystem dims plus flat strides.
struct Register {
  std::vector<int> dims;
  std::vector<std::int64_t> place;
  std::int64_t total = 1;

  explicit Register(std::vector<int> d);
};

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Matrix view of a tensor grouping its first n_row_axes axes as rows.
Eigen::MatrixXcd tensor_matrix(const Tensor& t, int n_row_axes);

// (I x A x I) * m, where A multiplies subsystem p. A may be rectangular
// (A.cols() == reg.dims[p]); the result's subsystem p has dim A.rows().
Eigen::MatrixXcd mult_subsystem_left(const Eigen::MatrixXcd& m, const Register& reg,
                                     int p, const Eigen::MatrixXcd& a);

// m * (I x B x I), B.rows() == reg.dims[p]; result subsystem p has dim
// B.cols(). `reg` describes the COLUMN register of m.
Eigen::MatrixXcd mult_subsystem_right(const Eigen::MatrixXcd& m, const Register& reg,
                                      int p, const Eigen::MatrixXcd& b);

// V m V^dag on subsystem p (generating direction; V maps dims[p] upward).
Eigen::MatrixXcd conjugate_subsystem(const Eigen::MatrixXcd& m, const Register& reg,
                                     int p, const Eigen::MatrixXcd& v);

// V^dag m V on subsystem p (compressing direction; V.rows() == dims[p]).
Eigen::MatrixXcd sandwich_subsystem(const Eigen::MatrixXcd& m, const Register& reg,
                                    int p, const Eigen::MatrixXcd& v);

// Two-subsystem gate versions at distinct positions (pa, pb); the gate's
// first factor matches pa, second pb. The gate must be square.
Eigen::MatrixXcd mult_gate2_left(const Eigen::MatrixXcd& m, const Register& reg,
                                 int pa, int pb, const Eigen::MatrixXcd& g);
Eigen::MatrixXcd mult_gate2_right(const Eigen::MatrixXcd& m, const Register& reg,
                                  int pa, int pb, const Eigen::MatrixXcd& g);
// G m G^dag
Eigen::MatrixXcd conjugate_gate2(const Eigen::MatrixXcd& m, const Register& reg,
                                 int pa, int pb, const Eigen::MatrixXcd& g);
// G^dag m G
Eigen::MatrixXcd sandwich_gate2(const Eigen::MatrixXcd& m, const Register& reg,
                                int pa, int pb, const Eigen::MatrixXcd& g);

// Trace out subsystem p.
Eigen::MatrixXcd trace_out(const Eigen::MatrixXcd& m, const Register& reg, int p);

// Operator op over the subsystems at `positions` (in that order), identity
// on the rest of the register.
Eigen::MatrixXcd embed_on(const Eigen::MatrixXcd& op, const std::vector<int>& positions,
                          const Register& reg);

// Reorders the subsystems of op: result subsystem k is input subsystem
// order[k]. dims describes the input.
Eigen::MatrixXcd permute_subsystems(const Eigen::MatrixXcd& op,
                                    const std::vector<int>& dims,
                                    const std::vector<int>& order);

}  // namespace merakit::internal
