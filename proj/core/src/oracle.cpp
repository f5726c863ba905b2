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

#include "merakit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "merakit/errors.hpp"

namespace merakit {

namespace {

constexpr std::int64_t kMaxAmplitudes = std::int64_t{1} << 20;

bool is_basis_zero(const std::vector<cplx>& v) {
  if (v.empty() || v[0] != cplx(1.0, 0.0)) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] != cplx(0.0, 0.0)) return false;
  }
  return true;
}

Tensor vector_tensor(const std::vector<cplx>& v) {
  return Tensor({static_cast<int>(v.size())}, v);
}

// State dim at each level must stay within the guard.
void check_cost(const Mera& m) {
  for (int level = 0; level <= m.n_layers(); ++level) {
    double log_dim = m.wires_at_level(level) * std::log2(double(m.dim_at_level(level)));
    if (log_dim > 20.0 + 1e-9) {
      std::ostringstream msg;
      msg << "state space at level " << level << " needs 2^" << log_dim
          << " amplitudes (guard 2^20)";
      throw CostGuardError(msg.str());
    }
  }
}

int layer_anc_dim(const MeraLayer& layer) {
  int f2 = layer.chi_in * layer.chi_in;
  if (f2 % layer.chi_out != 0) {
    std::ostringstream msg;
    msg << "layer with chi_in " << layer.chi_in << ", chi_out " << layer.chi_out
        << " has no ancilla factorization";
    throw CapabilityError(msg.str());
  }
  return f2 / layer.chi_out;
}

// The isometry tensor a slot contributes once its ancilla leg is fed:
// vacuum input -> the stored w; anything else -> parent contracted with
// the input vector.
Tensor effective_isometry(const Isometry& iso, const std::vector<cplx>& input,
                          int anc_dim, const std::string& slot) {
  if (static_cast<int>(input.size()) != anc_dim) {
    std::ostringstream msg;
    msg << slot << ": input dim " << input.size() << " != ancilla dim " << anc_dim;
    throw ArgumentError(msg.str());
  }
  if (is_basis_zero(input)) return *iso.w;
  if (!iso.parent) {
    throw CapabilityError(slot + ": non-vacuum input needs the parent unitary "
                          "(build with keep_parents)");
  }
  return contract(*iso.parent, vector_tensor(input), {{3, 0}});
}

Tensor effective_top(const TopTensor& top, const std::vector<cplx>& in1,
                     const std::vector<cplx>& in2) {
  int c = top.t->dim(0);
  if (static_cast<int>(in1.size()) != c || static_cast<int>(in2.size()) != c) {
    throw ArgumentError("top: input dims must equal the top wire dim");
  }
  if (is_basis_zero(in1) && is_basis_zero(in2)) return *top.t;
  if (!top.parent) {
    throw CapabilityError("top: non-vacuum input needs the parent unitary "
                          "(build with keep_parents)");
  }
  Tensor half = contract(*top.parent, vector_tensor(in1), {{2, 0}});
  return contract(half, vector_tensor(in2), {{2, 0}});
}

StateVector run_circuit(const Mera& m, const CircuitInputs* inputs) {
  check_structure(m);
  check_cost(m);

  Tensor psi;  // axes = wires of the current level, in order
  if (inputs) {
    psi = effective_top(m.top, inputs->top_input1, inputs->top_input2);
  } else {
    psi = *m.top.t;
  }

  for (int k = m.n_layers() - 1; k >= 0; --k) {
    const MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
    int pairs = layer.n_pairs();
    int n_fine = layer.n_wires_in;

    // Expand coarse wire j through isometry j. Contracting the leading axis
    // each time appends (out1_j, out2_j) behind the survivors, so after all
    // expansions the axes sit in fine wire order 0..n_fine-1.
    for (int j = 0; j < pairs; ++j) {
      Tensor w_eff;
      if (inputs) {
        std::ostringstream slot;
        slot << "layers[" << k << "].isometries[" << j << "]";
        w_eff = effective_isometry(
            layer.isometry_slot(j),
            inputs->isometry_inputs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)],
            layer_anc_dim(layer), slot.str());
      } else {
        w_eff = *layer.isometry_slot(j).w;
      }
      psi = contract(psi, w_eff, {{0, 2}});
    }

    // Disentangler j dresses fine wires (2j+1, (2j+2) mod n).
    for (int j = 0; j < pairs; ++j) {
      int a = 2 * j + 1;
      int b = (2 * j + 2) % n_fine;
      psi = contract(*layer.disentangler(j).u, psi, {{2, a}, {3, b}});
      // result axes: out1(=wire a), out2(=wire b), then the rest ascending
      std::vector<int> order(static_cast<std::size_t>(n_fine));
      int next = 2;
      for (int wire = 0; wire < n_fine; ++wire) {
        if (wire == a) {
          order[static_cast<std::size_t>(wire)] = 0;
        } else if (wire == b) {
          order[static_cast<std::size_t>(wire)] = 1;
        } else {
          order[static_cast<std::size_t>(wire)] = next++;
        }
      }
      psi = permute_axes(psi, order);
    }
  }

  StateVector out;
  out.n_sites = m.n_sites;
  out.site_dim = m.site_dim;
  out.amplitudes = std::move(psi.data());
  return out;
}

void check_state(const StateVector& psi) {
  if (psi.n_sites < 1 || psi.site_dim < 1) {
    throw ArgumentError("state needs positive n_sites and site_dim");
  }
  double log_dim = psi.n_sites * std::log2(double(psi.site_dim));
  if (log_dim > 20.0 + 1e-9) throw CostGuardError("state too large");
  std::int64_t expect = 1;
  for (int i = 0; i < psi.n_sites; ++i) expect *= psi.site_dim;
  if (static_cast<std::int64_t>(psi.amplitudes.size()) != expect) {
    throw ShapeError("amplitude count does not match site_dim^n_sites");
  }
}

// Scatter the state into a (sites x environment) matrix: rows indexed by
// the digits of `sites` in the order given, columns by the remaining wires
// in ascending order.
Eigen::MatrixXcd scatter(const StateVector& psi, const std::vector<int>& sites) {
  check_state(psi);
  std::vector<bool> used(static_cast<std::size_t>(psi.n_sites), false);
  for (int s : sites) {
    if (s < 0 || s >= psi.n_sites) throw ArgumentError("site out of range");
    if (used[static_cast<std::size_t>(s)]) throw ArgumentError("sites must be distinct");
    used[static_cast<std::size_t>(s)] = true;
  }
  int k = static_cast<int>(sites.size());
  std::int64_t d_s = 1;
  for (int i = 0; i < k; ++i) d_s *= psi.site_dim;
  if (d_s > 4096) throw CostGuardError("kept subsystem exceeds dimension 4096");
  std::int64_t d_e = static_cast<std::int64_t>(psi.amplitudes.size()) / d_s;

  // place value of each wire in the flat amplitude index
  std::vector<std::int64_t> place(static_cast<std::size_t>(psi.n_sites), 1);
  for (int i = psi.n_sites - 2; i >= 0; --i) {
    place[static_cast<std::size_t>(i)] =
        place[static_cast<std::size_t>(i + 1)] * psi.site_dim;
  }
  std::vector<std::int64_t> s_place;
  for (int s : sites) s_place.push_back(place[static_cast<std::size_t>(s)]);
  std::vector<std::int64_t> e_place;
  for (int w = 0; w < psi.n_sites; ++w) {
    if (!used[static_cast<std::size_t>(w)]) e_place.push_back(place[static_cast<std::size_t>(w)]);
  }

  auto expand = [&psi](std::int64_t counter, const std::vector<std::int64_t>& places) {
    std::int64_t flat = 0;
    for (int i = static_cast<int>(places.size()) - 1; i >= 0; --i) {
      flat += (counter % psi.site_dim) * places[static_cast<std::size_t>(i)];
      counter /= psi.site_dim;
    }
    return flat;
  };

  Eigen::MatrixXcd a(d_s, d_e);
  for (std::int64_t r = 0; r < d_s; ++r) {
    std::int64_t base = expand(r, s_place);
    for (std::int64_t c = 0; c < d_e; ++c) {
      a(r, c) = psi.amplitudes[static_cast<std::size_t>(base + expand(c, e_place))];
    }
  }
  return a;
}

}  // namespace

CircuitInputs CircuitInputs::vacuum(const Mera& m) {
  check_structure(m);
  CircuitInputs in;
  for (const auto& layer : m.layers) {
    int anc = layer_anc_dim(layer);
    std::vector<cplx> e0(static_cast<std::size_t>(anc), cplx(0.0, 0.0));
    e0[0] = cplx(1.0, 0.0);
    in.isometry_inputs.emplace_back(static_cast<std::size_t>(layer.n_pairs()), e0);
  }
  int c = m.top.t->dim(0);
  in.top_input1.assign(static_cast<std::size_t>(c), cplx(0.0, 0.0));
  in.top_input1[0] = cplx(1.0, 0.0);
  in.top_input2 = in.top_input1;
  return in;
}

StateVector full_state(const Mera& m) { return run_circuit(m, nullptr); }

StateVector full_state(const Mera& m, const CircuitInputs& inputs) {
  if (static_cast<int>(inputs.isometry_inputs.size()) != m.n_layers()) {
    throw ArgumentError("need one input list per layer");
  }
  for (int k = 0; k < m.n_layers(); ++k) {
    if (static_cast<int>(inputs.isometry_inputs[static_cast<std::size_t>(k)].size()) !=
        m.layers[static_cast<std::size_t>(k)].n_pairs()) {
      std::ostringstream msg;
      msg << "layer " << k << ": need one input per isometry slot";
      throw ArgumentError(msg.str());
    }
  }
  return run_circuit(m, &inputs);
}

DensityMatrix oracle_rdm(const StateVector& psi, const std::vector<int>& sites) {
  std::vector<int> sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  Eigen::MatrixXcd a = scatter(psi, sorted);
  Eigen::MatrixXcd rho = a * a.adjoint();
  // symmetrize away the roundoff skew before the constructor checks it
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::vector<int>(sorted.size(), psi.site_dim), std::move(rho));
}

cplx oracle_expect(const StateVector& psi, const Eigen::MatrixXcd& op,
                   const std::vector<int>& sites) {
  Eigen::MatrixXcd a = scatter(psi, sites);
  if (op.rows() != a.rows() || op.cols() != a.rows()) {
    throw ShapeError("operator dim does not match site_dim^|sites|");
  }
  return (a.adjoint() * (op * a)).trace();
}

cplx oracle_correlator(const StateVector& psi, const Eigen::MatrixXcd& a,
                       const Eigen::MatrixXcd& b, int s1, int s2) {
  if (s1 == s2) throw ArgumentError("correlator needs two distinct sites");
  if (a.rows() != psi.site_dim || a.cols() != psi.site_dim ||
      b.rows() != psi.site_dim || b.cols() != psi.site_dim) {
    throw ShapeError("correlator operators must be site_dim x site_dim");
  }
  Eigen::MatrixXcd ab(psi.site_dim * psi.site_dim, psi.site_dim * psi.site_dim);
  for (int i1 = 0; i1 < psi.site_dim; ++i1)
    for (int i2 = 0; i2 < psi.site_dim; ++i2)
      for (int j1 = 0; j1 < psi.site_dim; ++j1)
        for (int j2 = 0; j2 < psi.site_dim; ++j2)
          ab(i1 * psi.site_dim + i2, j1 * psi.site_dim + j2) = a(i1, j1) * b(i2, j2);
  return oracle_expect(psi, ab, {s1, s2});
}

cplx overlap(const StateVector& a, const StateVector& b) {
  if (a.n_sites != b.n_sites || a.site_dim != b.site_dim) {
    throw ShapeError("overlap needs states of identical shape");
  }
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  }
  return acc;
}

namespace {

double gate_difference(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

void require_same_gate(const Tensor& a, const Tensor& b, const char* kind,
                       int layer, int slot) {
  if (gate_difference(a, b) <= 1e-12) return;
  std::ostringstream msg;
  msg << "the two networks must run one circuit, but ";
  if (layer >= 0) {
    msg << "layer " << layer << " " << kind << " " << slot;
  } else {
    msg << kind;
  }
  msg << " differs beyond 1e-12";
  throw ArgumentError(msg.str());
}

}  // namespace

cplx overlap(const Mera& m1, const CircuitInputs& inputs1, const Mera& m2,
             const CircuitInputs& inputs2) {
  check_structure(m1);
  check_structure(m2);
  if (m1.n_sites != m2.n_sites || m1.site_dim != m2.site_dim ||
      m1.n_layers() != m2.n_layers()) {
    throw ArgumentError("the two networks must run one circuit, but their "
                        "shapes differ");
  }
  for (int k = 0; k < m1.n_layers(); ++k) {
    const MeraLayer& l1 = m1.layers[static_cast<std::size_t>(k)];
    const MeraLayer& l2 = m2.layers[static_cast<std::size_t>(k)];
    if (l1.n_wires_in != l2.n_wires_in || l1.chi_in != l2.chi_in ||
        l1.chi_out != l2.chi_out) {
      throw ArgumentError("the two networks must run one circuit, but their "
                          "shapes differ");
    }
    for (int j = 0; j < l1.n_pairs(); ++j) {
      require_same_gate(*l1.disentangler(j).u, *l2.disentangler(j).u,
                        "disentangler", k, j);
      const Isometry& i1 = l1.isometry_slot(j);
      const Isometry& i2 = l2.isometry_slot(j);
      require_same_gate(*i1.w, *i2.w, "isometry", k, j);
      if (i1.parent && i2.parent) {
        require_same_gate(*i1.parent, *i2.parent, "isometry parent", k, j);
      }
    }
  }
  require_same_gate(*m1.top.t, *m2.top.t, "the top tensor", -1, -1);
  if (m1.top.parent && m2.top.parent) {
    require_same_gate(*m1.top.parent, *m2.top.parent, "the top parent", -1, -1);
  }
  return overlap(full_state(m1, inputs1), full_state(m2, inputs2));
}

std::string state_to_json(const StateVector& psi) {
  check_state(psi);
  nlohmann::ordered_json doc;
  doc["n_sites"] = psi.n_sites;
  doc["site_dim"] = psi.site_dim;
  nlohmann::ordered_json amps = nlohmann::ordered_json::array();
  for (const auto& v : psi.amplitudes) {
    amps.push_back(nlohmann::ordered_json::array({v.real(), v.imag()}));
  }
  doc["amplitudes"] = std::move(amps);
  return doc.dump();
}

StateVector state_from_json(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw LoadError(std::string("not valid JSON: ") + e.what());
  }
  StateVector psi;
  if (!doc.is_object() || !doc.contains("n_sites") || !doc.contains("site_dim") ||
      !doc.contains("amplitudes") || !doc["amplitudes"].is_array()) {
    throw LoadError("state document needs n_sites, site_dim, amplitudes");
  }
  psi.n_sites = doc["n_sites"].get<int>();
  psi.site_dim = doc["site_dim"].get<int>();
  for (const auto& e : doc["amplitudes"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw LoadError("amplitudes: entries must be [re, im] pairs");
    }
    psi.amplitudes.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  try {
    check_state(psi);
  } catch (const std::exception& e) {
    throw LoadError(std::string("state document: ") + e.what());
  }
  return psi;
}

}  // namespace merakit
