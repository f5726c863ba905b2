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

#include "merakit/random.hpp"

#include <cmath>
#include <random>

#include "merakit/errors.hpp"

namespace merakit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Complex standard normals from a seeded mt19937_64.
Eigen::MatrixXcd gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double re = normal(gen);
      double im = normal(gen);
      g(r, c) = cplx(re, im);
    }
  }
  return g;
}

// Rotate each column so its first entry of magnitude > 1e-12 is real
// positive. Removes the QR sign/phase ambiguity.
void fix_column_phases(Eigen::MatrixXcd& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      cplx v = m(r, c);
      if (std::abs(v) > 1e-12) {
        m.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::uint64_t state = base;
  splitmix64(state);
  state ^= a * 0x9e3779b97f4a7c15ull;
  splitmix64(state);
  state ^= b * 0xc2b2ae3d27d4eb4full;
  splitmix64(state);
  state ^= c * 0x165667b19e3779f9ull;
  return splitmix64(state);
}

Eigen::MatrixXcd random_isometry(int rows, int cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) throw ArgumentError("isometry dims must be positive");
  if (rows < cols) throw ArgumentError("isometry needs rows >= cols");
  Eigen::MatrixXcd g = gaussian_matrix(rows, cols, seed);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  fix_column_phases(q);
  return q;
}

std::vector<cplx> random_unit_vector(int dim, std::uint64_t seed) {
  if (dim <= 0) throw ArgumentError("vector dim must be positive");
  Eigen::MatrixXcd g = gaussian_matrix(dim, 1, seed);
  double norm = g.norm();
  if (norm < 1e-300) throw ArgumentError("degenerate random draw");
  g /= norm;
  fix_column_phases(g);
  std::vector<cplx> out(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i)] = g(i, 0);
  return out;
}

}  // namespace merakit
