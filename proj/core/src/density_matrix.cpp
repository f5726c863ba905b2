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

#include "merakit/density_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "merakit/errors.hpp"

namespace merakit {

namespace {

std::int64_t dims_product(const std::vector<int>& dims) {
  std::int64_t p = 1;
  for (int d : dims) {
    if (d <= 0) throw ShapeError("subsystem dims must be positive");
    p *= d;
  }
  return p;
}

}  // namespace

DensityMatrix::DensityMatrix(std::vector<int> dims, Eigen::MatrixXcd matrix,
                             double tol)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
  std::int64_t expect = dims_product(dims_);
  if (matrix_.rows() != expect || matrix_.cols() != expect) {
    std::ostringstream msg;
    msg << "density matrix is " << matrix_.rows() << "x" << matrix_.cols()
        << " but subsystem dims multiply to " << expect;
    throw ShapeError(msg.str());
  }
  double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) {
    std::ostringstream msg;
    msg << "density matrix not Hermitian (deviation " << herm << ")";
    throw ValidationError(msg.str());
  }
  double tr_err = std::abs(matrix_.trace() - cplx(1.0, 0.0));
  if (tr_err > tol) {
    std::ostringstream msg;
    msg << "density matrix trace deviates from 1 by " << tr_err;
    throw ValidationError(msg.str());
  }
}

DensityMatrix DensityMatrix::pure(const std::vector<int>& dims,
                                  const Eigen::VectorXcd& amplitudes,
                                  double tol) {
  return DensityMatrix(dims, amplitudes * amplitudes.adjoint(), tol);
}

void DensityMatrix::validate(double tol) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_,
                                                         Eigen::EigenvaluesOnly);
  double lo = solver.eigenvalues().minCoeff();
  if (lo < -tol) {
    std::ostringstream msg;
    msg << "density matrix has eigenvalue " << lo << " below -" << tol;
    throw ValidationError(msg.str());
  }
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  int n = rho.n_subsystems();
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  int prev = -1;
  for (int k : keep) {
    if (k < 0 || k >= n) throw ArgumentError("partial_trace: subsystem out of range");
    if (k <= prev) throw ArgumentError("partial_trace: keep list must be strictly increasing");
    kept[static_cast<std::size_t>(k)] = true;
    prev = k;
  }

  std::vector<int> keep_dims, drop_dims;
  std::vector<int> keep_axes, drop_axes;
  for (int i = 0; i < n; ++i) {
    if (kept[static_cast<std::size_t>(i)]) {
      keep_dims.push_back(rho.dims()[static_cast<std::size_t>(i)]);
      keep_axes.push_back(i);
    } else {
      drop_dims.push_back(rho.dims()[static_cast<std::size_t>(i)]);
      drop_axes.push_back(i);
    }
  }
  std::int64_t dk = 1, dd = 1;
  for (int d : keep_dims) dk *= d;
  for (int d : drop_dims) dd *= d;

  if (keep_dims.empty()) keep_dims = {1};

  // Walk the full matrix once: out[(rk, ck)] += rho[(r, c)] for all indices
  // where the dropped parts of r and c agree.
  const Eigen::MatrixXcd& m = rho.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);

  // Strides of each subsystem in the flat row index.
  std::vector<std::int64_t> strides(static_cast<std::size_t>(n), 1);
  for (int i = n - 2; i >= 0; --i) {
    strides[static_cast<std::size_t>(i)] =
        strides[static_cast<std::size_t>(i + 1)] * rho.dims()[static_cast<std::size_t>(i + 1)];
  }
  std::vector<std::int64_t> keep_strides, drop_strides;
  std::vector<int> keep_sub_dims, drop_sub_dims;
  for (int a : keep_axes) {
    keep_strides.push_back(strides[static_cast<std::size_t>(a)]);
    keep_sub_dims.push_back(rho.dims()[static_cast<std::size_t>(a)]);
  }
  for (int a : drop_axes) {
    drop_strides.push_back(strides[static_cast<std::size_t>(a)]);
    drop_sub_dims.push_back(rho.dims()[static_cast<std::size_t>(a)]);
  }

  auto flat_of = [](std::int64_t counter, const std::vector<int>& dims,
                    const std::vector<std::int64_t>& strs) {
    std::int64_t flat = 0;
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
      std::int64_t d = dims[static_cast<std::size_t>(i)];
      flat += (counter % d) * strs[static_cast<std::size_t>(i)];
      counter /= d;
    }
    return flat;
  };

  for (std::int64_t rk = 0; rk < dk; ++rk) {
    std::int64_t row_base = flat_of(rk, keep_sub_dims, keep_strides);
    for (std::int64_t ck = 0; ck < dk; ++ck) {
      std::int64_t col_base = flat_of(ck, keep_sub_dims, keep_strides);
      cplx acc(0.0, 0.0);
      for (std::int64_t e = 0; e < dd; ++e) {
        std::int64_t off = flat_of(e, drop_sub_dims, drop_strides);
        acc += m(row_base + off, col_base + off);
      }
      out(rk, ck) = acc;
    }
  }

  return DensityMatrix(keep_dims, std::move(out));
}

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.matrix(),
                                                         Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    double p = solver.eigenvalues()[i];
    if (p < -1e-10) {
      std::ostringstream msg;
      msg << "entropy of non-positive matrix: eigenvalue " << p;
      throw ValidationError(msg.str());
    }
    if (p <= 0.0) continue;
    entropy -= p * std::log2(p);
  }
  // Tiny negative totals are roundoff from p*log2(p) near p=1.
  return entropy < 0.0 ? 0.0 : entropy;
}

}  // namespace merakit
