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

#include "merakit/mera.hpp"

namespace merakit {

// An operator supported on a few wires of one level. The matrix is indexed
// row-major over the support wires in the order they appear in `support`
// (make_local_operator always leaves them ascending).
struct LocalOperator {
  int level = 0;
  std::vector<int> support;
  Eigen::MatrixXcd op;
};

// Validates against the network (wire range, dims) and normalizes: support
// sorted ascending with the matrix's subsystems permuted to match.
LocalOperator make_local_operator(const Mera& m, int level,
                                  const std::vector<int>& support,
                                  const Eigen::MatrixXcd& op);

}  // namespace merakit
