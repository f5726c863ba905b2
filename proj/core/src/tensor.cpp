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

#include "merakit/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "merakit/errors.hpp"

namespace merakit {

namespace {

std::int64_t checked_total(const std::vector<int>& shape) {
  std::int64_t total = 1;
  for (int d : shape) {
    if (d <= 0) {
      std::ostringstream msg;
      msg << "tensor dims must be positive, got " << d;
      throw ShapeError(msg.str());
    }
    total *= d;
  }
  return total;
}

using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(checked_total(shape_)), cplx(0.0, 0.0));
}

Tensor::Tensor(std::vector<int> shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_total(shape_) != static_cast<std::int64_t>(data_.size())) {
    std::ostringstream msg;
    msg << "data length " << data_.size() << " does not match shape product "
        << checked_total(shape_);
    throw ShapeError(msg.str());
  }
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    std::ostringstream msg;
    msg << "axis " << axis << " out of range for rank " << rank();
    throw ArgumentError(msg.str());
  }
  return shape_[static_cast<std::size_t>(axis)];
}

std::vector<std::int64_t> Tensor::strides() const {
  std::vector<std::int64_t> s(shape_.size(), 1);
  for (int i = rank() - 2; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] =
        s[static_cast<std::size_t>(i + 1)] * shape_[static_cast<std::size_t>(i + 1)];
  }
  return s;
}

std::int64_t Tensor::flat_index(const std::vector<int>& index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw ArgumentError("index rank does not match tensor rank");
  }
  std::int64_t flat = 0;
  for (int i = 0; i < rank(); ++i) {
    int d = shape_[static_cast<std::size_t>(i)];
    int v = index[static_cast<std::size_t>(i)];
    if (v < 0 || v >= d) {
      std::ostringstream msg;
      msg << "index " << v << " out of range for axis " << i << " (dim " << d << ")";
      throw ArgumentError(msg.str());
    }
    flat = flat * d + v;
  }
  return flat;
}

cplx& Tensor::at(const std::vector<int>& index) {
  return data_[static_cast<std::size_t>(flat_index(index))];
}

const cplx& Tensor::at(const std::vector<int>& index) const {
  return data_[static_cast<std::size_t>(flat_index(index))];
}

Tensor Tensor::conj() const {
  Tensor out(shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = std::conj(data_[i]);
  return out;
}

Tensor permute_axes(const Tensor& t, const std::vector<int>& order) {
  int r = t.rank();
  if (static_cast<int>(order.size()) != r) {
    throw ArgumentError("permutation length does not match tensor rank");
  }
  std::vector<bool> seen(static_cast<std::size_t>(r), false);
  for (int a : order) {
    if (a < 0 || a >= r || seen[static_cast<std::size_t>(a)]) {
      throw ArgumentError("permutation is not a bijection on axes");
    }
    seen[static_cast<std::size_t>(a)] = true;
  }
  if (r == 0) return t;

  std::vector<int> new_shape(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    new_shape[static_cast<std::size_t>(k)] = t.dim(order[static_cast<std::size_t>(k)]);
  }
  Tensor out(new_shape);
  std::vector<std::int64_t> in_strides = t.strides();
  // Stride of output axis k in the input layout.
  std::vector<std::int64_t> walk(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    walk[static_cast<std::size_t>(k)] = in_strides[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
  }

  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  std::int64_t src = 0;
  const std::vector<cplx>& in = t.data();
  std::vector<cplx>& outd = out.data();
  const std::int64_t total = out.size();
  for (std::int64_t flat = 0; flat < total; ++flat) {
    outd[static_cast<std::size_t>(flat)] = in[static_cast<std::size_t>(src)];
    // Odometer increment over the output index, tracking src.
    for (int k = r - 1; k >= 0; --k) {
      std::size_t ks = static_cast<std::size_t>(k);
      if (++idx[ks] < new_shape[ks]) {
        src += walk[ks];
        break;
      }
      idx[ks] = 0;
      src -= walk[ks] * (new_shape[ks] - 1);
    }
  }
  return out;
}

Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<int, int>>& axis_pairs) {
  std::vector<bool> a_used(static_cast<std::size_t>(a.rank()), false);
  std::vector<bool> b_used(static_cast<std::size_t>(b.rank()), false);
  for (const auto& [ax, bx] : axis_pairs) {
    if (ax < 0 || ax >= a.rank() || bx < 0 || bx >= b.rank()) {
      throw ArgumentError("contraction axis out of range");
    }
    if (a_used[static_cast<std::size_t>(ax)] || b_used[static_cast<std::size_t>(bx)]) {
      throw ArgumentError("contraction axis repeated");
    }
    if (a.dim(ax) != b.dim(bx)) {
      std::ostringstream msg;
      msg << "contraction dim mismatch: a axis " << ax << " has dim " << a.dim(ax)
          << ", b axis " << bx << " has dim " << b.dim(bx);
      throw ShapeError(msg.str());
    }
    a_used[static_cast<std::size_t>(ax)] = true;
    b_used[static_cast<std::size_t>(bx)] = true;
  }

  std::vector<int> a_free, b_free;
  for (int i = 0; i < a.rank(); ++i) {
    if (!a_used[static_cast<std::size_t>(i)]) a_free.push_back(i);
  }
  for (int i = 0; i < b.rank(); ++i) {
    if (!b_used[static_cast<std::size_t>(i)]) b_free.push_back(i);
  }

  // a -> (free..., contracted...) ; b -> (contracted..., free...)
  std::vector<int> a_order = a_free;
  std::vector<int> b_order;
  std::int64_t m = 1, k = 1, n = 1;
  for (const auto& [ax, bx] : axis_pairs) {
    a_order.push_back(ax);
    b_order.push_back(bx);
    k *= a.dim(ax);
  }
  for (int i : b_free) b_order.push_back(i);
  for (int i : a_free) m *= a.dim(i);
  for (int i : b_free) n *= b.dim(i);

  Tensor ap = permute_axes(a, a_order);
  Tensor bp = permute_axes(b, b_order);

  Eigen::Map<const RowMat> ma(ap.data().data(), m, k);
  Eigen::Map<const RowMat> mb(bp.data().data(), k, n);

  std::vector<int> out_shape;
  out_shape.reserve(a_free.size() + b_free.size());
  for (int i : a_free) out_shape.push_back(a.dim(i));
  for (int i : b_free) out_shape.push_back(b.dim(i));
  Tensor out(out_shape);
  Eigen::Map<RowMat> mo(out.data().data(), m, n);
  mo.noalias() = ma * mb;
  return out;
}

Tensor group_axes(const Tensor& t, const std::vector<std::vector<int>>& groups) {
  std::vector<int> order;
  std::vector<int> new_shape;
  for (const auto& g : groups) {
    if (g.empty()) throw ArgumentError("axis group must be non-empty");
    std::int64_t d = 1;
    for (int a : g) {
      order.push_back(a);
      d *= t.dim(a);
    }
    if (d > (std::int64_t{1} << 30)) throw ShapeError("grouped axis dim too large");
    new_shape.push_back(static_cast<int>(d));
  }
  if (static_cast<int>(order.size()) != t.rank()) {
    throw ArgumentError("axis groups must cover every axis exactly once");
  }
  Tensor p = permute_axes(t, order);  // validates bijection
  return Tensor(new_shape, std::move(p.data()));
}

Tensor split_axis(const Tensor& t, int axis, const std::vector<int>& dims) {
  int d = t.dim(axis);
  std::int64_t prod = 1;
  for (int x : dims) {
    if (x <= 0) throw ShapeError("split dims must be positive");
    prod *= x;
  }
  if (prod != d) {
    std::ostringstream msg;
    msg << "split dims product " << prod << " != axis dim " << d;
    throw ShapeError(msg.str());
  }
  std::vector<int> new_shape;
  for (int i = 0; i < t.rank(); ++i) {
    if (i == axis) {
      new_shape.insert(new_shape.end(), dims.begin(), dims.end());
    } else {
      new_shape.push_back(t.dim(i));
    }
  }
  Tensor copy = t;
  return Tensor(new_shape, std::move(copy.data()));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("tensor shapes differ in addition");
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.data()[static_cast<std::size_t>(i)] += b.data()[static_cast<std::size_t>(i)];
  }
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("tensor shapes differ in subtraction");
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.data()[static_cast<std::size_t>(i)] -= b.data()[static_cast<std::size_t>(i)];
  }
  return out;
}

Tensor operator*(cplx scale, const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.data()) v *= scale;
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("tensor shapes differ in comparison");
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[static_cast<std::size_t>(i)] -
                                     b.data()[static_cast<std::size_t>(i)]));
  }
  return worst;
}

double max_abs(const Tensor& t) {
  double worst = 0.0;
  for (const auto& v : t.data()) worst = std::max(worst, std::abs(v));
  return worst;
}

Tensor identity_tensor(int dim) {
  if (dim <= 0) throw ShapeError("identity dim must be positive");
  Tensor out({dim, dim});
  for (int i = 0; i < dim; ++i) out.at({i, i}) = cplx(1.0, 0.0);
  return out;
}

}  // namespace merakit
