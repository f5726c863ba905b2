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

#include "merakit/cone.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "merakit/errors.hpp"
#include "subsystem_ops.hpp"

namespace merakit {

namespace {

using internal::Register;

std::vector<int> sorted_distinct(std::vector<int> v, int limit, const char* what) {
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] >= limit) {
      std::ostringstream msg;
      msg << what << " " << v[i] << " out of range [0, " << limit << ")";
      throw ArgumentError(msg.str());
    }
    if (i > 0 && v[i] == v[i - 1]) {
      std::ostringstream msg;
      msg << what << " list has a duplicate: " << v[i];
      throw ArgumentError(msg.str());
    }
  }
  return v;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::int64_t ipow(int base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

struct GuardedPlan {
  // targets[k] = cone wires at level k, for k in [level, n_layers()]
  std::vector<std::vector<int>> targets;
  int base_level = 0;
};

// Computes the per-level targets and enforces the cost guards.
GuardedPlan plan_cone(const Mera& m, int level, const std::vector<int>& wires,
                      const RdmOptions& opts) {
  GuardedPlan plan;
  plan.base_level = level;
  std::vector<int> t = sorted_distinct(wires, m.wires_at_level(level), "wire");
  if (t.empty()) throw ArgumentError("need at least one wire");
  if (static_cast<int>(t.size()) > opts.max_sites) {
    std::ostringstream msg;
    msg << t.size() << " kept wires exceed the guard of " << opts.max_sites
        << " (raise RdmOptions::max_sites to override)";
    throw CostGuardError(msg.str());
  }
  plan.targets.push_back(t);
  for (int k = level; k < m.n_layers(); ++k) {
    ConeStep step = cone_step(m.wires_at_level(k), plan.targets.back());
    if (static_cast<int>(step.coarse_wires.size()) > opts.max_cone_wires) {
      std::ostringstream msg;
      msg << "cone spreads to " << step.coarse_wires.size() << " wires at level "
          << (k + 1) << " (guard " << opts.max_cone_wires
          << "; raise RdmOptions::max_cone_wires to override)";
      throw CostGuardError(msg.str());
    }
    std::int64_t dim = ipow(m.dim_at_level(k), static_cast<int>(step.active_wires.size()));
    if (dim > opts.max_matrix_dim) {
      std::ostringstream msg;
      msg << "intermediate matrix side " << dim << " at level " << k << " (guard "
          << opts.max_matrix_dim << "; raise RdmOptions::max_matrix_dim to override)";
      throw CostGuardError(msg.str());
    }
    plan.targets.push_back(step.coarse_wires);
  }
  return plan;
}

DensityMatrix top_density(const Mera& m, const std::vector<int>& wires) {
  int c = m.top.t->dim(0);
  Eigen::MatrixXcd t = internal::tensor_matrix(*m.top.t, 2);  // (chi^2) x 1
  Eigen::Map<const Eigen::VectorXcd> vec(t.data(), t.size());
  Eigen::MatrixXcd rho = vec * vec.adjoint();
  DensityMatrix full({c, c}, std::move(rho));
  if (wires.size() == 2) return full;
  return partial_trace(full, {wires[0]});
}

}  // namespace

ConeStep cone_step(int n_wires, const std::vector<int>& target_wires) {
  std::vector<int> t = sorted_distinct(target_wires, n_wires, "target wire");
  if (t.empty()) throw ArgumentError("need at least one target wire");

  // every wire sits under exactly one disentangler, so the active bricks
  // come straight from the targets — no scan over the layer
  ConeStep step;
  std::set<int> gates, active, coarse;
  for (int w : t) gates.insert(disentangler_at_wire(n_wires, w));
  for (int j : gates) {
    auto pair = disentangler_wires_of(n_wires, j);
    active.insert(pair[0]);
    active.insert(pair[1]);
  }
  for (int w : active) coarse.insert(w / 2);
  step.u_gates.assign(gates.begin(), gates.end());
  step.active_wires.assign(active.begin(), active.end());
  step.coarse_wires.assign(coarse.begin(), coarse.end());
  return step;
}

std::vector<std::vector<int>> cone_levels(int n_sites,
                                          const std::vector<int>& sites) {
  if (!is_power_of_two(n_sites) || n_sites < 4) {
    throw ArgumentError("n_sites must be a power of two >= 4");
  }
  std::vector<std::vector<int>> levels;
  levels.push_back(sorted_distinct(sites, n_sites, "site"));
  if (levels.back().empty()) throw ArgumentError("need at least one site");
  for (int n = n_sites; n > 2; n /= 2) {
    levels.push_back(cone_step(n, levels.back()).coarse_wires);
  }
  return levels;
}

std::vector<std::vector<int>> cone_of(const Mera& m,
                                      const std::vector<int>& sites) {
  check_structure(m);
  return cone_levels(m.n_sites, sites);
}

ConeSlice descend_step(const Mera& m, int layer_index, const ConeSlice& above,
                       const std::vector<int>& target_wires) {
  if (layer_index < 0 || layer_index >= m.n_layers()) {
    throw ArgumentError("layer index out of range");
  }
  const MeraLayer& layer = m.layers[static_cast<std::size_t>(layer_index)];
  int n = layer.n_wires_in;
  std::vector<int> target = sorted_distinct(target_wires, n, "target wire");
  ConeStep step = cone_step(n, target);

  if (above.level != layer_index + 1) {
    throw ArgumentError("slice level does not sit on top of the layer");
  }
  if (above.wires != step.coarse_wires) {
    throw ArgumentError("slice wires do not match the cone of the target");
  }
  for (int d : above.sigma.dims()) {
    if (d != layer.chi_out) throw ShapeError("slice dims do not match the layer");
  }

  std::set<int> active(step.active_wires.begin(), step.active_wires.end());

  Eigen::MatrixXcd mat = above.sigma.matrix();
  std::vector<int> dims = above.sigma.dims();
  // Wire labels of the current subsystems. Fine labels replace the coarse
  // label 2c, 2c+1 as isometry c is applied; coarse wires are processed in
  // ascending order so labels stay sorted (fine c-labels and coarse
  // c'-labels never interleave out of order).
  std::vector<int> labels = above.wires;   // coarse wire numbers
  std::vector<bool> is_fine(labels.size(), false);

  for (int c : step.coarse_wires) {
    int pos = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!is_fine[i] && labels[i] == c) {
        pos = static_cast<int>(i);
        break;
      }
    }
    Eigen::MatrixXcd w =
        internal::tensor_matrix(*layer.isometry_slot(c).w, 2);
    mat = internal::conjugate_subsystem(mat, Register(dims), pos, w);
    // subsystem pos becomes the fine pair (2c, 2c+1)
    dims[static_cast<std::size_t>(pos)] = layer.chi_in;
    dims.insert(dims.begin() + pos + 1, layer.chi_in);
    labels[static_cast<std::size_t>(pos)] = 2 * c;
    labels.insert(labels.begin() + pos + 1, 2 * c + 1);
    is_fine[static_cast<std::size_t>(pos)] = true;
    is_fine.insert(is_fine.begin() + pos + 1, true);
    // drop fine wires outside the active set right away
    for (int f : {2 * c + 1, 2 * c}) {
      if (active.count(f)) continue;
      int fpos = -1;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (is_fine[i] && labels[i] == f) {
          fpos = static_cast<int>(i);
          break;
        }
      }
      mat = internal::trace_out(mat, Register(dims), fpos);
      dims.erase(dims.begin() + fpos);
      labels.erase(labels.begin() + fpos);
      is_fine.erase(is_fine.begin() + fpos);
    }
  }

  auto pos_of = [&labels](int wire) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == wire) return static_cast<int>(i);
    }
    throw StructureError("cone bookkeeping lost a wire");
  };

  for (int j : step.u_gates) {
    auto pair = disentangler_wires_of(n, j);
    Eigen::MatrixXcd g = internal::tensor_matrix(*layer.disentangler(j).u, 2);
    mat = internal::conjugate_gate2(mat, Register(dims), pos_of(pair[0]),
                                    pos_of(pair[1]), g);
  }

  // trace the active wires that are not wanted
  for (int w : step.active_wires) {
    if (std::binary_search(target.begin(), target.end(), w)) continue;
    int pos = pos_of(w);
    mat = internal::trace_out(mat, Register(dims), pos);
    dims.erase(dims.begin() + pos);
    labels.erase(labels.begin() + pos);
  }

  ConeSlice out{layer_index, target,
                DensityMatrix(std::vector<int>(target.size(), layer.chi_in),
                              std::move(mat))};
  return out;
}

DensityMatrix rdm_at_level(const Mera& m, int level,
                           const std::vector<int>& wires,
                           const RdmOptions& options) {
  check_structure(m);
  if (level < 0 || level > m.n_layers()) throw ArgumentError("level out of range");
  GuardedPlan plan = plan_cone(m, level, wires, options);

  ConeSlice slice{m.n_layers(), plan.targets.back(),
                  top_density(m, plan.targets.back())};
  for (int k = m.n_layers() - 1; k >= level; --k) {
    slice = descend_step(m, k, slice,
                         plan.targets[static_cast<std::size_t>(k - level)]);
  }
  slice.sigma.validate();
  return slice.sigma;
}

DensityMatrix rdm(const Mera& m, const std::vector<int>& sites,
                  const RdmOptions& options) {
  return rdm_at_level(m, 0, sites, options);
}

cplx expect_local(const Mera& m, const LocalOperator& op,
                  const RdmOptions& options) {
  for (std::size_t i = 1; i < op.support.size(); ++i) {
    if (op.support[i] <= op.support[i - 1]) {
      throw ArgumentError("operator support must be ascending (use make_local_operator)");
    }
  }
  DensityMatrix rho = rdm_at_level(m, op.level, op.support, options);
  if (rho.matrix().rows() != op.op.rows() || op.op.rows() != op.op.cols()) {
    throw ShapeError("operator dim does not match its support");
  }
  return (rho.matrix() * op.op).trace();
}

cplx correlator(const Mera& m, const Eigen::MatrixXcd& a,
                const Eigen::MatrixXcd& b, int s1, int s2,
                const RdmOptions& options) {
  check_structure(m);
  if (s1 == s2) throw ArgumentError("correlator needs two distinct sites");
  int d = m.site_dim;
  if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d) {
    throw ShapeError("correlator operators must be site_dim x site_dim");
  }
  const Eigen::MatrixXcd& first = s1 < s2 ? a : b;
  const Eigen::MatrixXcd& second = s1 < s2 ? b : a;
  LocalOperator op;
  op.level = 0;
  op.support = {std::min(s1, s2), std::max(s1, s2)};
  op.op = internal::kron(first, second);
  return expect_local(m, op, options);
}

LocalOperator make_local_operator(const Mera& m, int level,
                                  const std::vector<int>& support,
                                  const Eigen::MatrixXcd& op) {
  check_structure(m);
  if (level < 0 || level > m.n_layers()) throw ArgumentError("level out of range");
  int n = m.wires_at_level(level);
  int d = m.dim_at_level(level);
  std::vector<int> given = support;
  for (int w : given) {
    if (w < 0 || w >= n) throw ArgumentError("support wire out of range");
  }
  std::int64_t expect = ipow(d, static_cast<int>(given.size()));
  if (op.rows() != expect || op.cols() != expect) {
    throw ShapeError("operator dim does not match support size");
  }

  // sort the support, permuting the operator's subsystems along
  std::vector<int> perm(given.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::sort(perm.begin(), perm.end(),
            [&given](int x, int y) { return given[static_cast<std::size_t>(x)] < given[static_cast<std::size_t>(y)]; });
  for (std::size_t i = 1; i < perm.size(); ++i) {
    if (given[static_cast<std::size_t>(perm[i])] ==
        given[static_cast<std::size_t>(perm[i - 1])]) {
      throw ArgumentError("support wires must be distinct");
    }
  }

  LocalOperator out;
  out.level = level;
  for (int p : perm) out.support.push_back(given[static_cast<std::size_t>(p)]);
  out.op = internal::permute_subsystems(
      op, std::vector<int>(given.size(), d), perm);
  return out;
}

}  // namespace merakit
