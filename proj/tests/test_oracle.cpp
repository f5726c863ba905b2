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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "merakit/errors.hpp"
#include "merakit/mera.hpp"
#include "merakit/oracle.hpp"
#include "merakit/random.hpp"

using namespace merakit;

namespace {

Eigen::MatrixXcd kron_mat(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd tensor_matrix(const Tensor& t, int row_axes) {
  Eigen::Index rows = 1, cols = 1;
  for (int i = 0; i < t.rank(); ++i) {
    if (i < row_axes) rows *= t.dim(i); else cols *= t.dim(i);
  }
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = t.data()[static_cast<std::size_t>(r * cols + c)];
  return m;
}

// Applies a two-wire gate on wires (a, b) of an n-wire register (every wire
// of dim d) by plain digit arithmetic. Independent of the library's
// contraction machinery.
Eigen::VectorXcd apply_gate(const Eigen::MatrixXcd& g, const Eigen::VectorXcd& psi,
                            int n, int d, int a, int b) {
  std::vector<std::int64_t> place(n, 1);
  for (int i = n - 2; i >= 0; --i) place[i] = place[i + 1] * d;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (std::int64_t r = 0; r < psi.size(); ++r) {
    int ra = static_cast<int>((r / place[a]) % d);
    int rb = static_cast<int>((r / place[b]) % d);
    std::int64_t r_rest = r - ra * place[a] - rb * place[b];
    cplx acc(0.0, 0.0);
    for (int ca = 0; ca < d; ++ca)
      for (int cb = 0; cb < d; ++cb)
        acc += g(ra * d + rb, ca * d + cb) * psi(r_rest + ca * place[a] + cb * place[b]);
    out(r) = acc;
  }
  return out;
}

// Fully independent state construction: dense layer matrices applied to a
// dense vector, fine wires in ascending order throughout.
Eigen::VectorXcd dense_state(const Mera& m) {
  const Tensor& t = *m.top.t;
  Eigen::VectorXcd psi(t.size());
  for (std::int64_t i = 0; i < t.size(); ++i) psi(i) = t.data()[static_cast<std::size_t>(i)];

  for (int k = m.n_layers() - 1; k >= 0; --k) {
    const MeraLayer& layer = m.layers[k];
    int pairs = layer.n_pairs();
    int n_fine = layer.n_wires_in;
    int d = layer.chi_in;

    Eigen::MatrixXcd expand = tensor_matrix(*layer.isometry_slot(0).w, 2);
    for (int j = 1; j < pairs; ++j) {
      expand = kron_mat(expand, tensor_matrix(*layer.isometry_slot(j).w, 2));
    }
    psi = (expand * psi).eval();

    for (int j = 0; j < pairs; ++j) {
      Eigen::MatrixXcd u = tensor_matrix(*layer.disentangler(j).u, 2);
      psi = apply_gate(u, psi, n_fine, d, 2 * j + 1, (2 * j + 2) % n_fine);
    }
  }
  return psi;
}

Eigen::MatrixXcd pauli(char which) {
  Eigen::MatrixXcd p(2, 2);
  switch (which) {
    case 'x': p << 0, 1, 1, 0; break;
    case 'y': p << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0); break;
    case 'z': p << 1, 0, 0, -1; break;
    default: p.setIdentity();
  }
  return p;
}

double norm2(const StateVector& psi) {
  double acc = 0.0;
  for (const auto& v : psi.amplitudes) acc += std::norm(v);
  return acc;
}

}  // namespace

TEST_CASE("the product network materializes |0...0> exactly") {
  StateVector psi = full_state(build_product(8, 2));
  REQUIRE(psi.amplitudes.size() == 256);
  CHECK(psi.amplitudes[0] == cplx(1.0, 0.0));
  for (std::size_t i = 1; i < psi.amplitudes.size(); ++i) {
    CHECK(psi.amplitudes[i] == cplx(0.0, 0.0));
  }
}

TEST_CASE("full_state matches the dense layer-matrix construction") {
  std::vector<Mera> cases;
  cases.push_back(build_random(8, 2, 42, MeraMode::generic));
  cases.push_back(build_random(8, 2, 7, MeraMode::translation_invariant));
  cases.push_back(build_random(8, 2, 11, MeraMode::scale_invariant));
  cases.push_back(build_random(8, std::vector<int>{2, 3, 2}, 5, MeraMode::generic));
  cases.push_back(build_random(8, 3, 13, MeraMode::generic));
  for (const Mera& m : cases) {
    StateVector fast = full_state(m);
    Eigen::VectorXcd slow = dense_state(m);
    REQUIRE(static_cast<std::int64_t>(fast.amplitudes.size()) == slow.size());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < slow.size(); ++i) {
      worst = std::max(worst, std::abs(fast.amplitudes[static_cast<std::size_t>(i)] - slow(i)));
    }
    CHECK(worst < 1e-12);
    CHECK(std::abs(norm2(fast) - 1.0) < 1e-12);
  }
}

TEST_CASE("full_state is deterministic") {
  Mera m = build_random(8, 2, 99, MeraMode::generic);
  StateVector a = full_state(m);
  StateVector b = full_state(m);
  CHECK(a.amplitudes == b.amplitudes);
}

TEST_CASE("cost guard blocks exponential blowups") {
  CHECK_THROWS_AS(full_state(build_random(32, 2, 1, MeraMode::generic)),
                  CostGuardError);
  CHECK_THROWS_AS(full_state(build_random(16, 4, 1, MeraMode::generic)),
                  CostGuardError);
  CHECK_NOTHROW(full_state(build_random(16, 2, 1, MeraMode::generic)));
}

TEST_CASE("oracle_rdm agrees with the generic partial trace") {
  Mera m = build_random(8, 2, 5, MeraMode::generic);
  StateVector psi = full_state(m);
  Eigen::VectorXcd amps(256);
  for (int i = 0; i < 256; ++i) amps(i) = psi.amplitudes[i];
  DensityMatrix full = DensityMatrix::pure(std::vector<int>(8, 2), amps);

  for (std::vector<int> sites : {std::vector<int>{0}, {3}, {7}, {2, 5}, {0, 7}, {1, 2, 3}}) {
    DensityMatrix direct = oracle_rdm(psi, sites);
    DensityMatrix traced = partial_trace(full, sites);
    CHECK((direct.matrix() - traced.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    direct.validate();
    CHECK(std::abs(direct.matrix().trace() - cplx(1.0, 0.0)) < 1e-12);
  }

  // site order in the argument does not matter; the result is ascending
  DensityMatrix a = oracle_rdm(psi, {5, 2});
  DensityMatrix b = oracle_rdm(psi, {2, 5});
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(oracle_rdm(psi, {2, 2}), ArgumentError);
  CHECK_THROWS_AS(oracle_rdm(psi, {8}), ArgumentError);
}

TEST_CASE("reduced matrices are mutually consistent") {
  Mera m = build_random(16, 2, 21, MeraMode::translation_invariant);
  StateVector psi = full_state(m);
  DensityMatrix pair = oracle_rdm(psi, {3, 9});
  DensityMatrix single = oracle_rdm(psi, {3});
  DensityMatrix traced = partial_trace(pair, {0});
  CHECK((single.matrix() - traced.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oracle_expect matches trace against the reduced matrix") {
  Mera m = build_random(8, 2, 31, MeraMode::generic);
  StateVector psi = full_state(m);
  Eigen::MatrixXcd z = pauli('z'), x = pauli('x');

  cplx direct = oracle_expect(psi, z, {4});
  DensityMatrix r4 = oracle_rdm(psi, {4});
  cplx via_rdm = (r4.matrix() * z).trace();
  CHECK(std::abs(direct - via_rdm) < 1e-12);

  // two-site, unsorted site order
  Eigen::MatrixXcd zx = kron_mat(z, x);
  cplx two = oracle_expect(psi, zx, {6, 1});
  DensityMatrix r16 = oracle_rdm(psi, {1, 6});
  Eigen::MatrixXcd xz = kron_mat(x, z);  // ascending order swaps the factors
  CHECK(std::abs(two - (r16.matrix() * xz).trace()) < 1e-12);

  CHECK_THROWS_AS(oracle_expect(psi, zx, {1}), ShapeError);
}

TEST_CASE("oracle_correlator is symmetric under operator-site swap") {
  Mera m = build_random(8, 2, 17, MeraMode::scale_invariant);
  StateVector psi = full_state(m);
  Eigen::MatrixXcd z = pauli('z'), x = pauli('x');
  cplx ab = oracle_correlator(psi, z, x, 2, 6);
  cplx ba = oracle_correlator(psi, x, z, 6, 2);
  CHECK(std::abs(ab - ba) < 1e-13);
  CHECK(std::abs(ab) > 1e-8);  // generic state: not degenerate
  CHECK_THROWS_AS(oracle_correlator(psi, z, x, 3, 3), ArgumentError);
}

TEST_CASE("vacuum inputs reproduce the bare network") {
  BuildOptions opts;
  opts.keep_parents = true;
  Mera m = build_random(8, 2, 23, MeraMode::generic, opts);
  StateVector bare = full_state(m);
  StateVector fed = full_state(m, CircuitInputs::vacuum(m));
  CHECK(bare.amplitudes == fed.amplitudes);

  // vacuum inputs do not need parents at all
  Mera lean = build_random(8, 2, 23, MeraMode::generic);
  StateVector lean_fed = full_state(lean, CircuitInputs::vacuum(lean));
  CHECK(bare.amplitudes == lean_fed.amplitudes);
}

TEST_CASE("state overlap factorizes over slot inputs") {
  BuildOptions opts;
  opts.keep_parents = true;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Mera m = build_random(8, 2, seed, MeraMode::generic, opts);

    // two independent families of slot inputs
    CircuitInputs in1 = CircuitInputs::vacuum(m);
    CircuitInputs in2 = CircuitInputs::vacuum(m);
    std::uint64_t tag = 1000 * seed;
    for (int k = 0; k < m.n_layers(); ++k) {
      for (std::size_t j = 0; j < in1.isometry_inputs[k].size(); ++j) {
        int anc = static_cast<int>(in1.isometry_inputs[k][j].size());
        in1.isometry_inputs[k][j] = random_unit_vector(anc, tag++);
        in2.isometry_inputs[k][j] = random_unit_vector(anc, tag++);
      }
    }
    in1.top_input1 = random_unit_vector(2, tag++);
    in2.top_input1 = random_unit_vector(2, tag++);
    in1.top_input2 = random_unit_vector(2, tag++);
    in2.top_input2 = random_unit_vector(2, tag++);

    StateVector psi1 = full_state(m, in1);
    StateVector psi2 = full_state(m, in2);
    CHECK(std::abs(norm2(psi1) - 1.0) < 1e-12);

    // the unitary circuit maps slot inputs isometrically, so the overlap is
    // the product of the slotwise inner products
    cplx expected(1.0, 0.0);
    auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
      cplx acc(0.0, 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
      return acc;
    };
    for (int k = 0; k < m.n_layers(); ++k) {
      for (std::size_t j = 0; j < in1.isometry_inputs[k].size(); ++j) {
        expected *= dot(in1.isometry_inputs[k][j], in2.isometry_inputs[k][j]);
      }
    }
    expected *= dot(in1.top_input1, in2.top_input1);
    expected *= dot(in1.top_input2, in2.top_input2);

    CHECK(std::abs(overlap(psi1, psi2) - expected) < 1e-10);
    CHECK(std::abs(overlap(psi1, psi1) - cplx(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("non-vacuum inputs without parents are a capability error") {
  Mera m = build_random(8, 2, 4, MeraMode::generic);  // no parents kept
  CircuitInputs in = CircuitInputs::vacuum(m);
  in.isometry_inputs[0][1] = random_unit_vector(2, 5);
  CHECK_THROWS_AS(full_state(m, in), CapabilityError);
  CircuitInputs in2 = CircuitInputs::vacuum(m);
  in2.top_input1 = random_unit_vector(2, 6);
  CHECK_THROWS_AS(full_state(m, in2), CapabilityError);
  // malformed input lists are argument errors
  CircuitInputs in3 = CircuitInputs::vacuum(m);
  in3.isometry_inputs.pop_back();
  CHECK_THROWS_AS(full_state(m, in3), ArgumentError);
}

TEST_CASE("network overlap multiplies the slot overlaps") {
  BuildOptions opts;
  opts.keep_parents = true;
  auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
  };
  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    CAPTURE(seed);
    Mera m = build_random(8, 2, seed, MeraMode::generic, opts);
    CircuitInputs in1 = CircuitInputs::vacuum(m);
    CircuitInputs in2 = CircuitInputs::vacuum(m);
    std::uint64_t tag = 7000 * seed;
    cplx expected(1.0, 0.0);
    for (int k = 0; k < m.n_layers(); ++k) {
      for (std::size_t j = 0; j < in1.isometry_inputs[k].size(); ++j) {
        int anc = static_cast<int>(in1.isometry_inputs[k][j].size());
        in1.isometry_inputs[k][j] = random_unit_vector(anc, tag++);
        in2.isometry_inputs[k][j] = random_unit_vector(anc, tag++);
        expected *= dot(in1.isometry_inputs[k][j], in2.isometry_inputs[k][j]);
      }
    }
    in1.top_input1 = random_unit_vector(2, tag++);
    in2.top_input1 = random_unit_vector(2, tag++);
    in1.top_input2 = random_unit_vector(2, tag++);
    in2.top_input2 = random_unit_vector(2, tag++);
    expected *= dot(in1.top_input1, in2.top_input1);
    expected *= dot(in1.top_input2, in2.top_input2);

    cplx got = overlap(m, in1, m, in2);
    CHECK(std::abs(got - expected) < 1e-10);
    // and it really is the plain state-vector inner product
    CHECK(std::abs(got - overlap(full_state(m, in1), full_state(m, in2))) <
          1e-12);
    // identical inputs give a normalized self-overlap
    CHECK(std::abs(overlap(m, in1, m, in1) - cplx(1.0, 0.0)) < 1e-12);

    // one orthogonal slot kills the whole product
    CircuitInputs in3 = in1;
    in3.isometry_inputs[1][0] = {cplx(0.0, 0.0), cplx(1.0, 0.0)};
    CircuitInputs in4 = in1;
    in4.isometry_inputs[1][0] = {cplx(1.0, 0.0), cplx(0.0, 0.0)};
    CHECK(std::abs(overlap(m, in3, m, in4)) <= 1e-10);
  }
}

TEST_CASE("network overlap accepts shared and expanded copies of one circuit") {
  Mera ti = build_random(16, 2, 21, MeraMode::translation_invariant);
  Mera expanded = expand_shared(ti);
  cplx got = overlap(ti, CircuitInputs::vacuum(ti), expanded,
                     CircuitInputs::vacuum(expanded));
  CHECK(std::abs(got - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("network overlap refuses distinct circuits") {
  BuildOptions opts;
  opts.keep_parents = true;
  Mera m1 = build_random(8, 2, 31, MeraMode::generic, opts);
  Mera other = build_random(8, 2, 32, MeraMode::generic, opts);
  CHECK_THROWS_AS(
      overlap(m1, CircuitInputs::vacuum(m1), other, CircuitInputs::vacuum(other)),
      ArgumentError);

  Mera wide = build_random(8, 3, 31, MeraMode::generic, opts);
  CHECK_THROWS_AS(
      overlap(m1, CircuitInputs::vacuum(m1), wide, CircuitInputs::vacuum(wide)),
      ArgumentError);

  // same isometries, but a parent that departs on the ancilla-1 column:
  // the visible network agrees while the circuits differ
  Mera m2 = m1;
  const Tensor& parent = *m1.layers[0].isometries[2].parent;
  Tensor tweaked = parent;
  for (std::size_t i = 0; i < tweaked.data().size(); ++i) {
    if (i % 2 == 1) tweaked.data()[i] *= cplx(0.0, 1.0);
  }
  m2.layers[0].isometries[2].parent = std::make_shared<Tensor>(std::move(tweaked));
  CHECK_THROWS_AS(
      overlap(m1, CircuitInputs::vacuum(m1), m2, CircuitInputs::vacuum(m2)),
      ArgumentError);
}

TEST_CASE("state vectors round-trip through JSON") {
  Mera m = build_random(8, 2, 55, MeraMode::generic);
  StateVector psi = full_state(m);
  StateVector back = state_from_json(state_to_json(psi));
  CHECK(back.n_sites == psi.n_sites);
  CHECK(back.site_dim == psi.site_dim);
  CHECK(back.amplitudes == psi.amplitudes);
  CHECK_THROWS_AS(state_from_json("{}"), LoadError);
  CHECK_THROWS_AS(state_from_json("{\"n_sites\":2,\"site_dim\":2,\"amplitudes\":[[1,0]]}"),
                  LoadError);
}
