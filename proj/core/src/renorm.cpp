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

#include "merakit/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "merakit/density_matrix.hpp"
#include "merakit/errors.hpp"
#include "merakit/oracle.hpp"
#include "subsystem_ops.hpp"

namespace merakit {

namespace {

using internal::Register;

std::int64_t ipow(int base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

int find_label(const std::vector<int>& labels, int wire) {
  auto it = std::lower_bound(labels.begin(), labels.end(), wire);
  if (it == labels.end() || *it != wire) {
    throw StructureError("operator flow lost a wire");
  }
  return static_cast<int>(it - labels.begin());
}

// Extends the operator with an identity subsystem of dim d, keeping the
// label list sorted.
Eigen::MatrixXcd insert_identity(const Eigen::MatrixXcd& op,
                                 std::vector<int>& labels,
                                 std::vector<int>& dims, int wire, int d) {
  auto it = std::lower_bound(labels.begin(), labels.end(), wire);
  int pos = static_cast<int>(it - labels.begin());
  std::vector<int> new_dims = dims;
  new_dims.insert(new_dims.begin() + pos, d);
  std::vector<int> positions;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i) {
    positions.push_back(i < pos ? i : i + 1);
  }
  Eigen::MatrixXcd out = internal::embed_on(op, positions, Register(new_dims));
  labels.insert(labels.begin() + pos, wire);
  dims = std::move(new_dims);
  return out;
}

void check_hermitian(const LocalOperator& t, std::size_t index) {
  double dev = (t.op - t.op.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    std::ostringstream msg;
    msg << "term " << index << " is not Hermitian (deviation " << dev << ")";
    throw ValidationError(msg.str());
  }
}

// Least-squares line fit; returns {slope, r_squared}.
std::pair<double, double> fit_line(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = intercept + slope * x[i];
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  const double r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
  return {slope, r2};
}

}  // namespace

LocalOperator ascend_operator(const Mera& m, const LocalOperator& op) {
  check_structure(m);
  if (op.level < 0 || op.level >= m.n_layers()) {
    throw ArgumentError("operator level has no layer above it");
  }
  const MeraLayer& layer = m.layers[static_cast<std::size_t>(op.level)];
  const int n = layer.n_wires_in;
  const int d = layer.chi_in;
  if (op.support.empty()) throw ArgumentError("operator needs support");
  for (std::size_t i = 0; i < op.support.size(); ++i) {
    if (op.support[i] < 0 || op.support[i] >= n) {
      throw ArgumentError("support wire out of range");
    }
    if (i > 0 && op.support[i] <= op.support[i - 1]) {
      throw ArgumentError("operator support must be ascending (use make_local_operator)");
    }
  }
  const std::int64_t want = ipow(d, static_cast<int>(op.support.size()));
  if (op.op.rows() != want || op.op.cols() != want) {
    throw ShapeError("operator dim does not match its support");
  }

  ConeStep step = cone_step(n, op.support);

  // adjoint of the trace: identity on the touched wires outside the support
  std::vector<int> labels = step.active_wires;
  std::vector<int> dims(labels.size(), d);
  std::vector<int> positions;
  for (int w : op.support) positions.push_back(find_label(labels, w));
  Eigen::MatrixXcd cur =
      internal::embed_on(op.op, positions, Register(dims));

  // adjoint of the disentangler conjugations
  for (int j : step.u_gates) {
    auto pair = disentangler_wires_of(n, j);
    Eigen::MatrixXcd g = internal::tensor_matrix(*layer.disentangler(j).u, 2);
    cur = internal::sandwich_gate2(cur, Register(dims), find_label(labels, pair[0]),
                                   find_label(labels, pair[1]), g);
  }

  // adjoint of the isometry expansions: compress each fine pair; a fine
  // wire the cone never touched enters as identity first
  for (int c : step.coarse_wires) {
    for (int f : {2 * c, 2 * c + 1}) {
      if (!std::binary_search(labels.begin(), labels.end(), f)) {
        cur = insert_identity(cur, labels, dims, f, d);
      }
    }
    int pos = find_label(labels, 2 * c);
    // merge the adjacent pair (2c, 2c+1) into one subsystem, then compress
    std::vector<int> merged = dims;
    merged[static_cast<std::size_t>(pos)] = d * d;
    merged.erase(merged.begin() + pos + 1);
    Eigen::MatrixXcd w =
        internal::tensor_matrix(*layer.isometry_slot(c).w, 2);
    cur = internal::sandwich_subsystem(cur, Register(merged), pos, w);
    dims = merged;
    dims[static_cast<std::size_t>(pos)] = layer.chi_out;
    labels.erase(labels.begin() + pos + 1);
    labels[static_cast<std::size_t>(pos)] = c;  // coarse label; stays sorted
  }

  LocalOperator out;
  out.level = op.level + 1;
  out.support = step.coarse_wires;
  out.op = std::move(cur);
  return out;
}

std::vector<HamiltonianTerms> effective_hamiltonians(const Mera& m,
                                                     const HamiltonianTerms& h0) {
  check_structure(m);
  if (h0.level != 0) throw ArgumentError("the input terms must live at the sites");
  if (h0.terms.empty()) throw ArgumentError("need at least one term");

  const int n = m.n_sites;
  HamiltonianTerms base;
  base.level = 0;
  for (std::size_t i = 0; i < h0.terms.size(); ++i) {
    const LocalOperator& t = h0.terms[i];
    if (t.level != 0) throw ArgumentError("every input term must live at the sites");
    if (t.support.size() > 2) {
      throw ArgumentError("input terms must be nearest-neighbor (one or two sites)");
    }
    LocalOperator norm = make_local_operator(m, 0, t.support, t.op);
    if (norm.support.size() == 2) {
      int a = norm.support[0], b = norm.support[1];
      if (b - a != 1 && !(a == 0 && b == n - 1)) {
        throw ArgumentError("input terms must be nearest-neighbor (adjacent sites)");
      }
    }
    check_hermitian(norm, i);
    base.terms.push_back(std::move(norm));
  }

  auto merge = [](HamiltonianTerms in) {
    std::map<std::vector<int>, Eigen::MatrixXcd> sums;
    for (const LocalOperator& t : in.terms) {
      auto it = sums.find(t.support);
      if (it == sums.end()) {
        sums.emplace(t.support, t.op);
      } else {
        it->second += t.op;
      }
    }
    HamiltonianTerms out;
    out.level = in.level;
    for (auto& [support, op] : sums) {
      out.terms.push_back(LocalOperator{in.level, support, std::move(op)});
    }
    return out;
  };

  std::vector<HamiltonianTerms> flow;
  flow.push_back(merge(std::move(base)));
  for (int tau = 0; tau < m.n_layers(); ++tau) {
    HamiltonianTerms next;
    next.level = tau + 1;
    for (const LocalOperator& t : flow.back().terms) {
      next.terms.push_back(ascend_operator(m, t));
    }
    flow.push_back(merge(std::move(next)));
  }
  return flow;
}

double hamiltonian_expectation(const Mera& m, const HamiltonianTerms& h,
                               const RdmOptions& options) {
  cplx total = 0.0;
  for (const LocalOperator& t : h.terms) total += expect_local(m, t, options);
  return total.real();
}

Eigen::MatrixXcd scaling_superoperator(const Tensor& u, const Tensor& w) {
  if (u.rank() != 4 || w.rank() != 3) {
    throw StructureError("need a two-wire unitary and a two-to-one isometry");
  }
  const int f = w.dim(0);
  for (int ax = 0; ax < 4; ++ax) {
    if (u.dim(ax) != f) throw StructureError("disentangler dims do not match the isometry");
  }
  if (w.dim(1) != f) throw StructureError("isometry fine dims differ");
  if (w.dim(2) != f) {
    throw StructureError("one-site coarse-graining channel needs uniform wire dims");
  }

  Eigen::MatrixXcd gu = internal::tensor_matrix(u, 2);
  Eigen::MatrixXcd gw = internal::tensor_matrix(w, 2);

  // One channel: the operator sits on one of the two wires crossed by a
  // disentangler; ascend through u and both neighbor isometries, then
  // normalized-trace the coarse wire the site does not belong to.
  auto channel = [&](const Eigen::MatrixXcd& op, bool odd) {
    Register reg4({f, f, f, f});
    Eigen::MatrixXcd x =
        internal::embed_on(op, {odd ? 1 : 2}, reg4);
    x = internal::sandwich_gate2(x, reg4, 1, 2, gu);
    x = internal::sandwich_subsystem(x, Register({f * f, f, f}), 0, gw);
    x = internal::sandwich_subsystem(x, Register({f, f * f}), 1, gw);
    Eigen::MatrixXcd kept =
        internal::trace_out(x, Register({f, f}), odd ? 1 : 0);
    return Eigen::MatrixXcd(kept / static_cast<double>(f));
  };

  const int dim = f * f;
  Eigen::MatrixXcd s(dim, dim);
  for (int a = 0; a < f; ++a) {
    for (int b = 0; b < f; ++b) {
      Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(f, f);
      basis(a, b) = 1.0;
      Eigen::MatrixXcd image =
          0.5 * (channel(basis, true) + channel(basis, false));
      for (int i = 0; i < f; ++i) {
        for (int j = 0; j < f; ++j) {
          s(i * f + j, a * f + b) = image(i, j);
        }
      }
    }
  }
  return s;
}

Eigen::MatrixXcd scaling_superoperator(const Mera& m) {
  check_structure(m);
  if (m.mode != MeraMode::scale_invariant) {
    throw ArgumentError("the one-site channel is defined for scale-invariant networks");
  }
  const MeraLayer& layer = m.layers[0];
  return scaling_superoperator(*layer.disentangler(0).u, *layer.isometry_slot(0).w);
}

double exponent_from_superoperator(const Eigen::MatrixXcd& s) {
  if (s.rows() != s.cols() || s.rows() < 2) {
    throw ShapeError("superoperator must be a square matrix of dim >= 2");
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(s, false);
  if (solver.info() != Eigen::Success) {
    throw ValidationError("eigenvalue computation failed");
  }
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  Eigen::Index unit = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double dist = std::abs(ev(i) - cplx(1.0, 0.0));
    if (dist < best) {
      best = dist;
      unit = i;
    }
  }
  double mag2 = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i == unit) continue;
    mag2 = std::max(mag2, std::abs(ev(i)));
  }
  if (mag2 <= 0.0) throw DegenerateSignalError("no subleading eigenvalue");
  return -std::log2(mag2);
}

ExponentReport correlation_exponent(const Mera& m, const Eigen::MatrixXcd& a,
                                    const Eigen::MatrixXcd& b,
                                    const std::vector<int>& distances,
                                    const RdmOptions& options) {
  check_structure(m);
  if (m.mode != MeraMode::scale_invariant) {
    throw ArgumentError("correlation exponents need a scale-invariant network");
  }
  const int d = m.site_dim;
  if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d) {
    throw ShapeError("operators must be site_dim x site_dim");
  }
  if (distances.size() < 2) throw ArgumentError("need at least two distances");
  std::vector<int> rs = distances;
  std::sort(rs.begin(), rs.end());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i] < 1 || rs[i] > m.n_sites / 4) {
      throw ArgumentError("distances must lie in [1, n_sites/4]");
    }
    if (i > 0 && rs[i] == rs[i - 1]) throw ArgumentError("distances must be distinct");
  }

  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd at = a - (a.trace() / static_cast<double>(d)) * id;
  const Eigen::MatrixXcd bt = b - (b.trace() / static_cast<double>(d)) * id;

  ExponentReport report;
  std::vector<double> xs, ys;
  for (int r : rs) {
    cplx c = correlator(m, at, bt, 0, r, options);
    double mag = std::abs(c);
    report.log2_distance.push_back(std::log2(static_cast<double>(r)));
    report.log2_abs_correlator.push_back(
        mag > 0.0 ? std::log2(mag) : -std::numeric_limits<double>::infinity());
    if (mag >= 1e-14) {
      xs.push_back(std::log2(static_cast<double>(r)));
      ys.push_back(std::log2(mag));
    }
  }
  if (xs.size() < 2) {
    throw DegenerateSignalError(
        "correlators below 1e-14 at (almost) every distance; no power law to fit "
        "(identity-like operators have no decaying component)");
  }
  auto [slope, r2] = fit_line(xs, ys);
  report.q_fit = -slope;
  report.r_squared = r2;
  report.flagged = r2 < 0.95;
  report.q_eig = exponent_from_superoperator(scaling_superoperator(m));
  return report;
}

BlockEntropyReport block_entropy(const Mera& m, int start, int length,
                                 EntropyMethod method,
                                 const RdmOptions& options) {
  check_structure(m);
  if (start < 0 || start >= m.n_sites) throw ArgumentError("start site out of range");
  if (length < 1 || length > m.n_sites) throw ArgumentError("block length out of range");

  std::vector<int> sites;
  for (int i = 0; i < length; ++i) sites.push_back((start + i) % m.n_sites);

  int chi_max = 1;
  for (int level = 0; level <= m.n_layers(); ++level) {
    chi_max = std::max(chi_max, m.dim_at_level(level));
  }
  const double taubar =
      std::ceil(std::log2(static_cast<double>(length))) + 1.0;

  BlockEntropyReport report;
  report.bound_bits = std::log2(static_cast<double>(chi_max)) * (4.0 + 2.0 * taubar);
  if (method == EntropyMethod::cone) {
    report.entropy_bits = von_neumann_entropy(rdm(m, sites, options));
  } else {
    report.entropy_bits = von_neumann_entropy(oracle_rdm(full_state(m), sites));
  }
  return report;
}

}  // namespace merakit
