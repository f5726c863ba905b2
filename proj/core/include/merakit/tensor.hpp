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

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace merakit {

using cplx = std::complex<double>;

// Dense tensor of complex doubles, row-major (last axis fastest).
// Axes are numbered 0..rank-1; a rank-0 tensor holds a single scalar.
class Tensor {
 public:
  Tensor() : shape_(), data_(1, cplx(0.0, 0.0)) {}
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<cplx> data);

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int axis) const;
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  cplx& at(const std::vector<int>& index);
  const cplx& at(const std::vector<int>& index) const;
  std::int64_t flat_index(const std::vector<int>& index) const;

  // Strides in elements, row-major.
  std::vector<std::int64_t> strides() const;

  Tensor conj() const;

 private:
  std::vector<int> shape_;
  std::vector<cplx> data_;
};

// Pairwise contraction: sums over axes_a[k] of `a` against axes_b[k] of `b`.
// Result axes are the free axes of `a` in their original order followed by
// the free axes of `b` in their original order.
Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<int, int>>& axis_pairs);

// Reorders axes so that result axis k is input axis order[k].
Tensor permute_axes(const Tensor& t, const std::vector<int>& order);

// Merges consecutive groups of axes (after an implicit permute putting the
// groups side by side in the given order) into single axes. Every input axis
// must appear in exactly one group.
Tensor group_axes(const Tensor& t, const std::vector<std::vector<int>>& groups);

// Splits one axis into several consecutive axes whose dims multiply to the
// original dim (row-major order preserved).
Tensor split_axis(const Tensor& t, int axis, const std::vector<int>& dims);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(cplx scale, const Tensor& t);

double max_abs_diff(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& t);

// Identity matrix as a rank-2 tensor.
Tensor identity_tensor(int dim);

}  // namespace merakit
