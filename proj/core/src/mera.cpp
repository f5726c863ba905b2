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

#include "merakit/mera.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <sstream>

#include "merakit/errors.hpp"
#include "merakit/random.hpp"

namespace merakit {

namespace {

using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

std::string slot_path(int layer, const char* kind, int j) {
  std::ostringstream s;
  s << "layers[" << layer << "]." << kind << "[" << j << "]";
  return s.str();
}

// Matrix view of a tensor whose first `n_row_axes` axes form the rows.
// Row-major storage makes this a plain reshape.
Eigen::Map<const RowMat> as_matrix(const Tensor& t, int n_row_axes) {
  std::int64_t rows = 1, cols = 1;
  for (int i = 0; i < t.rank(); ++i) {
    if (i < n_row_axes) {
      rows *= t.dim(i);
    } else {
      cols *= t.dim(i);
    }
  }
  return Eigen::Map<const RowMat>(t.data().data(), rows, cols);
}

Tensor tensor_from_matrix(const Eigen::MatrixXcd& m,
                          const std::vector<int>& shape) {
  Tensor t(shape);
  Eigen::Index rows = m.rows(), cols = m.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      t.data()[static_cast<std::size_t>(r * cols + c)] = m(r, c);
    }
  }
  return t;
}

double unitarity_deviation(const Tensor& t, int n_row_axes) {
  auto m = as_matrix(t, n_row_axes);
  Eigen::Index n = m.rows();
  double left =
      (m.adjoint() * m - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  double right =
      (m * m.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  return std::max(left, right);
}

double isometry_deviation(const Tensor& t, int n_row_axes) {
  auto m = as_matrix(t, n_row_axes);
  Eigen::Index c = m.cols();
  return (m.adjoint() * m - Eigen::MatrixXcd::Identity(c, c))
      .cwiseAbs()
      .maxCoeff();
}

void require_shape(const std::shared_ptr<const Tensor>& t,
                   const std::vector<int>& shape, const std::string& path) {
  if (!t) throw StructureError(path + ": tensor missing");
  if (t->shape() != shape) {
    std::ostringstream msg;
    msg << path << ": expected shape [";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) msg << ",";
      msg << shape[i];
    }
    msg << "], got [";
    for (int i = 0; i < t->rank(); ++i) {
      if (i) msg << ",";
      msg << t->dim(i);
    }
    msg << "]";
    throw StructureError(msg.str());
  }
}

}  // namespace

std::string mode_name(MeraMode mode) {
  switch (mode) {
    case MeraMode::generic:
      return "generic";
    case MeraMode::translation_invariant:
      return "translation_invariant";
    case MeraMode::scale_invariant:
      return "scale_invariant";
  }
  throw ArgumentError("unknown mode value");
}

MeraMode mode_from_name(const std::string& name) {
  if (name == "generic") return MeraMode::generic;
  if (name == "translation_invariant") return MeraMode::translation_invariant;
  if (name == "scale_invariant") return MeraMode::scale_invariant;
  throw ArgumentError("unknown mode name: " + name);
}

namespace {

void require_layer_width(int n_wires) {
  if (n_wires < 4 || n_wires % 2 != 0) {
    std::ostringstream msg;
    msg << "layer needs an even wire count >= 4, got " << n_wires;
    throw StructureError(msg.str());
  }
}

}  // namespace

LayerWiring wiring(int n_wires) {
  require_layer_width(n_wires);
  LayerWiring lw;
  lw.n_wires = n_wires;
  int pairs = n_wires / 2;
  lw.disentangler_wires.reserve(pairs);
  lw.isometry_wires.reserve(pairs);
  for (int j = 0; j < pairs; ++j) {
    lw.disentangler_wires.push_back({2 * j + 1, (2 * j + 2) % n_wires});
    lw.isometry_wires.push_back({2 * j, 2 * j + 1});
  }
  return lw;
}

std::array<int, 2> disentangler_wires_of(int n_wires, int j) {
  require_layer_width(n_wires);
  if (j < 0 || j >= n_wires / 2) {
    throw ArgumentError("disentangler slot out of range");
  }
  return {2 * j + 1, (2 * j + 2) % n_wires};
}

int disentangler_at_wire(int n_wires, int wire) {
  require_layer_width(n_wires);
  if (wire < 0 || wire >= n_wires) throw ArgumentError("wire out of range");
  return wire % 2 == 1 ? (wire - 1) / 2 : ((wire + n_wires - 2) / 2) % (n_wires / 2);
}

const Disentangler& MeraLayer::disentangler(int j) const {
  if (j < 0 || j >= n_pairs()) throw ArgumentError("disentangler slot out of range");
  return disentanglers[shared ? 0 : static_cast<std::size_t>(j)];
}

const Isometry& MeraLayer::isometry_slot(int j) const {
  if (j < 0 || j >= n_pairs()) throw ArgumentError("isometry slot out of range");
  return isometries[shared ? 0 : static_cast<std::size_t>(j)];
}

int Mera::wires_at_level(int level) const {
  if (level < 0 || level > n_layers()) throw ArgumentError("level out of range");
  return n_sites >> level;
}

int Mera::dim_at_level(int level) const {
  if (level < 0 || level > n_layers()) throw ArgumentError("level out of range");
  if (level == 0) return site_dim;
  return layers[static_cast<std::size_t>(level - 1)].chi_out;
}

void check_structure(const Mera& m) {
  if (!is_power_of_two(m.n_sites) || m.n_sites < 4) {
    throw StructureError("n_sites must be a power of two >= 4");
  }
  if (m.site_dim < 1) throw StructureError("site_dim must be >= 1");
  int expect_layers = log2_exact(m.n_sites) - 1;
  if (m.n_layers() != expect_layers) {
    std::ostringstream msg;
    msg << "expected " << expect_layers << " layers for " << m.n_sites
        << " sites, got " << m.n_layers();
    throw StructureError(msg.str());
  }

  int prev_chi = m.site_dim;
  for (int k = 0; k < m.n_layers(); ++k) {
    const MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
    std::ostringstream base;
    base << "layers[" << k << "]";
    if (layer.n_wires_in != (m.n_sites >> k)) {
      throw StructureError(base.str() + ": wrong n_wires_in");
    }
    require_layer_width(layer.n_wires_in);
    if (layer.chi_in != prev_chi) {
      throw StructureError(base.str() + ": chi_in does not chain from below");
    }
    if (layer.chi_out < 1) throw StructureError(base.str() + ": chi_out must be >= 1");
    std::int64_t room =
        static_cast<std::int64_t>(layer.chi_in) * layer.chi_in;
    if (layer.chi_out > room) {
      throw StructureError(base.str() +
                           ": chi_out exceeds chi_in^2 (isometry impossible)");
    }
    std::size_t expect_slots =
        layer.shared ? 1 : static_cast<std::size_t>(layer.n_pairs());
    if (layer.disentanglers.size() != expect_slots) {
      throw StructureError(base.str() + ": wrong disentangler count");
    }
    if (layer.isometries.size() != expect_slots) {
      throw StructureError(base.str() + ": wrong isometry count");
    }
    int f = layer.chi_in, c = layer.chi_out;
    for (std::size_t j = 0; j < layer.disentanglers.size(); ++j) {
      require_shape(layer.disentanglers[j].u, {f, f, f, f},
                    slot_path(k, "disentanglers", static_cast<int>(j)));
    }
    for (std::size_t j = 0; j < layer.isometries.size(); ++j) {
      std::string path = slot_path(k, "isometries", static_cast<int>(j));
      require_shape(layer.isometries[j].w, {f, f, c}, path);
      if (layer.isometries[j].parent) {
        std::int64_t anc = room / c;
        if (anc * c != room) {
          throw StructureError(path + ": parent present but chi_out does not divide chi_in^2");
        }
        require_shape(layer.isometries[j].parent, {f, f, c, static_cast<int>(anc)},
                      path + ".parent");
      }
    }
    if (m.mode != MeraMode::generic && !layer.shared) {
      throw StructureError(base.str() + ": mode requires shared layer tensors");
    }
    prev_chi = layer.chi_out;
  }

  require_shape(m.top.t, {prev_chi, prev_chi}, "top");
  if (m.top.parent) {
    require_shape(m.top.parent, {prev_chi, prev_chi, prev_chi, prev_chi},
                  "top.parent");
  }

  if (m.mode == MeraMode::scale_invariant) {
    const MeraLayer& first = m.layers[0];
    if (first.chi_in != m.site_dim || first.chi_out != m.site_dim) {
      throw StructureError("scale_invariant needs uniform wire dims");
    }
    for (int k = 1; k < m.n_layers(); ++k) {
      const MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
      if (layer.chi_in != first.chi_in || layer.chi_out != first.chi_out) {
        throw StructureError("scale_invariant needs uniform wire dims");
      }
      if (max_abs_diff(*layer.disentanglers[0].u, *first.disentanglers[0].u) != 0.0 ||
          max_abs_diff(*layer.isometries[0].w, *first.isometries[0].w) != 0.0) {
        std::ostringstream msg;
        msg << "layers[" << k << "]: scale_invariant layers must hold identical tensors";
        throw StructureError(msg.str());
      }
    }
  }
}

ValidationReport validate(const Mera& m) {
  check_structure(m);
  ValidationReport report;
  auto push = [&report](std::string path, std::string constraint, double dev) {
    report.entries.push_back({std::move(path), std::move(constraint), dev});
    if (dev > report.worst) report.worst = dev;
  };

  for (int k = 0; k < m.n_layers(); ++k) {
    const MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < layer.disentanglers.size(); ++j) {
      push(slot_path(k, "disentanglers", static_cast<int>(j)), "unitary",
           unitarity_deviation(*layer.disentanglers[j].u, 2));
    }
    for (std::size_t j = 0; j < layer.isometries.size(); ++j) {
      std::string path = slot_path(k, "isometries", static_cast<int>(j));
      const Isometry& iso = layer.isometries[j];
      push(path, "isometry", isometry_deviation(*iso.w, 2));
      if (iso.parent) {
        push(path + ".parent", "unitary", unitarity_deviation(*iso.parent, 2));
        // anc = 0 slice must reproduce w
        double worst_slice = 0.0;
        const Tensor& p = *iso.parent;
        const Tensor& w = *iso.w;
        int f = layer.chi_in, c = layer.chi_out;
        for (int o1 = 0; o1 < f; ++o1)
          for (int o2 = 0; o2 < f; ++o2)
            for (int in = 0; in < c; ++in) {
              double d = std::abs(p.at({o1, o2, in, 0}) - w.at({o1, o2, in}));
              if (d > worst_slice) worst_slice = d;
            }
        push(path + ".parent", "parent_slice", worst_slice);
      }
    }
  }

  {
    double norm2 = 0.0;
    for (const auto& v : m.top.t->data()) norm2 += std::norm(v);
    push("top", "normalized", std::abs(std::sqrt(norm2) - 1.0));
    if (m.top.parent) {
      push("top.parent", "unitary", unitarity_deviation(*m.top.parent, 2));
      double worst_slice = 0.0;
      int c = m.top.t->dim(0);
      for (int o1 = 0; o1 < c; ++o1)
        for (int o2 = 0; o2 < c; ++o2) {
          double d = std::abs(m.top.parent->at({o1, o2, 0, 0}) -
                              m.top.t->at({o1, o2}));
          if (d > worst_slice) worst_slice = d;
        }
      push("top.parent", "parent_slice", worst_slice);
    }
  }
  return report;
}

namespace {

Mera build_impl(int n_sites, const std::vector<int>& level_dims,
                std::uint64_t seed, MeraMode mode, bool keep_parents) {
  if (!is_power_of_two(n_sites) || n_sites < 4) {
    throw ArgumentError("n_sites must be a power of two >= 4");
  }
  int n_layers = log2_exact(n_sites) - 1;
  if (static_cast<int>(level_dims.size()) != n_layers + 1) {
    std::ostringstream msg;
    msg << "need " << (n_layers + 1) << " level dims for " << n_sites
        << " sites, got " << level_dims.size();
    throw ArgumentError(msg.str());
  }
  for (int d : level_dims) {
    if (d < 2) throw ArgumentError("wire dims must be >= 2");
  }
  for (int k = 0; k < n_layers; ++k) {
    std::int64_t room = static_cast<std::int64_t>(level_dims[k]) * level_dims[k];
    if (level_dims[static_cast<std::size_t>(k + 1)] > room) {
      throw ArgumentError("level dim exceeds square of the dim below it");
    }
  }
  if (mode == MeraMode::scale_invariant) {
    for (int d : level_dims) {
      if (d != level_dims[0]) {
        throw ArgumentError("scale_invariant needs uniform wire dims");
      }
    }
  }
  if (keep_parents) {
    for (int k = 0; k < n_layers; ++k) {
      std::int64_t room = static_cast<std::int64_t>(level_dims[k]) * level_dims[k];
      if (room % level_dims[static_cast<std::size_t>(k + 1)] != 0) {
        throw ArgumentError(
            "keep_parents needs chi_out dividing chi_in^2 at every layer");
      }
    }
  }

  bool si = mode == MeraMode::scale_invariant;
  Mera m;
  m.n_sites = n_sites;
  m.site_dim = level_dims[0];
  m.mode = mode;
  m.layers.resize(static_cast<std::size_t>(n_layers));

  for (int k = 0; k < n_layers; ++k) {
    MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
    layer.n_wires_in = n_sites >> k;
    layer.chi_in = level_dims[static_cast<std::size_t>(k)];
    layer.chi_out = level_dims[static_cast<std::size_t>(k + 1)];
    layer.shared = mode != MeraMode::generic;

    if (si && k > 0) {
      layer.disentanglers = m.layers[0].disentanglers;
      layer.isometries = m.layers[0].isometries;
      continue;
    }

    int f = layer.chi_in, c = layer.chi_out;
    int f2 = f * f;
    int n_slots = layer.shared ? 1 : layer.n_pairs();
    std::uint64_t layer_tag = si ? 0 : static_cast<std::uint64_t>(k);

    for (int j = 0; j < n_slots; ++j) {
      std::uint64_t su = mix_seed(seed, layer_tag, 0, static_cast<std::uint64_t>(j));
      Eigen::MatrixXcd u_mat = random_isometry(f2, f2, su);
      Disentangler d;
      d.u = std::make_shared<Tensor>(tensor_from_matrix(u_mat, {f, f, f, f}));
      layer.disentanglers.push_back(std::move(d));

      std::uint64_t sw = mix_seed(seed, layer_tag, 1, static_cast<std::uint64_t>(j));
      Isometry iso;
      if (f2 % c == 0) {
        // Draw the full unitary and take its anc = 0 slice, so the isometry
        // does not depend on whether the parent is kept.
        int anc = f2 / c;
        Eigen::MatrixXcd p_mat = random_isometry(f2, f2, sw);
        Tensor parent = tensor_from_matrix(p_mat, {f, f, c, anc});
        Tensor w({f, f, c});
        for (int o1 = 0; o1 < f; ++o1)
          for (int o2 = 0; o2 < f; ++o2)
            for (int in = 0; in < c; ++in)
              w.at({o1, o2, in}) = parent.at({o1, o2, in, 0});
        iso.w = std::make_shared<Tensor>(std::move(w));
        if (keep_parents) iso.parent = std::make_shared<Tensor>(std::move(parent));
      } else {
        Eigen::MatrixXcd w_mat = random_isometry(f2, c, sw);
        iso.w = std::make_shared<Tensor>(tensor_from_matrix(w_mat, {f, f, c}));
      }
      layer.isometries.push_back(std::move(iso));
    }
  }

  {
    int c = level_dims.back();
    int c2 = c * c;
    std::uint64_t st = mix_seed(seed, si ? 0 : static_cast<std::uint64_t>(n_layers),
                                2, 0);
    Eigen::MatrixXcd p_mat = random_isometry(c2, c2, st);
    Tensor parent = tensor_from_matrix(p_mat, {c, c, c, c});
    Tensor t({c, c});
    for (int o1 = 0; o1 < c; ++o1)
      for (int o2 = 0; o2 < c; ++o2) t.at({o1, o2}) = parent.at({o1, o2, 0, 0});
    m.top.t = std::make_shared<Tensor>(std::move(t));
    if (keep_parents) m.top.parent = std::make_shared<Tensor>(std::move(parent));
  }

  check_structure(m);
  return m;
}

}  // namespace

Mera build_random(int n_sites, int chi, std::uint64_t seed, MeraMode mode,
                  const BuildOptions& options) {
  if (chi < 2) throw ArgumentError("chi must be >= 2");
  int site_dim = options.site_dim > 0 ? options.site_dim : chi;
  if (mode == MeraMode::scale_invariant && site_dim != chi) {
    throw ArgumentError("scale_invariant needs site_dim == chi");
  }
  if (!is_power_of_two(n_sites) || n_sites < 4) {
    throw ArgumentError("n_sites must be a power of two >= 4");
  }
  int n_layers = log2_exact(n_sites) - 1;
  std::vector<int> level_dims(static_cast<std::size_t>(n_layers + 1), chi);
  level_dims[0] = site_dim;
  return build_impl(n_sites, level_dims, seed, mode, options.keep_parents);
}

Mera build_random(int n_sites, const std::vector<int>& level_dims,
                  std::uint64_t seed, MeraMode mode,
                  const BuildOptions& options) {
  if (options.site_dim > 0 && !level_dims.empty() &&
      options.site_dim != level_dims[0]) {
    throw ArgumentError("site_dim option conflicts with level_dims[0]");
  }
  return build_impl(n_sites, level_dims, seed, mode, options.keep_parents);
}

Mera build_product(int n_sites, int chi, bool keep_parents) {
  if (chi < 2) throw ArgumentError("chi must be >= 2");
  if (!is_power_of_two(n_sites) || n_sites < 4) {
    throw ArgumentError("n_sites must be a power of two >= 4");
  }
  int n_layers = log2_exact(n_sites) - 1;
  int c2 = chi * chi;

  auto u = std::make_shared<Tensor>(
      tensor_from_matrix(Eigen::MatrixXcd::Identity(c2, c2), {chi, chi, chi, chi}));
  Tensor parent_t =
      tensor_from_matrix(Eigen::MatrixXcd::Identity(c2, c2), {chi, chi, chi, chi});
  Tensor w_t({chi, chi, chi});
  for (int o1 = 0; o1 < chi; ++o1)
    for (int in = 0; in < chi; ++in) w_t.at({o1, 0, in}) = (o1 == in) ? 1.0 : 0.0;
  auto w = std::make_shared<Tensor>(std::move(w_t));
  std::shared_ptr<const Tensor> parent;
  if (keep_parents) parent = std::make_shared<Tensor>(parent_t);

  Mera m;
  m.n_sites = n_sites;
  m.site_dim = chi;
  m.mode = MeraMode::scale_invariant;
  m.layers.resize(static_cast<std::size_t>(n_layers));
  for (int k = 0; k < n_layers; ++k) {
    MeraLayer& layer = m.layers[static_cast<std::size_t>(k)];
    layer.n_wires_in = n_sites >> k;
    layer.chi_in = chi;
    layer.chi_out = chi;
    layer.shared = true;
    layer.disentanglers.push_back({u});
    layer.isometries.push_back({w, parent});
  }
  Tensor t({chi, chi});
  t.at({0, 0}) = 1.0;
  m.top.t = std::make_shared<Tensor>(std::move(t));
  if (keep_parents) {
    m.top.parent = std::make_shared<Tensor>(
        tensor_from_matrix(Eigen::MatrixXcd::Identity(c2, c2), {chi, chi, chi, chi}));
  }
  check_structure(m);
  return m;
}

Mera expand_shared(const Mera& m) {
  check_structure(m);
  Mera out = m;
  out.mode = MeraMode::generic;
  for (auto& layer : out.layers) {
    if (!layer.shared) continue;
    Disentangler d = layer.disentanglers[0];
    Isometry iso = layer.isometries[0];
    layer.disentanglers.assign(static_cast<std::size_t>(layer.n_pairs()), d);
    layer.isometries.assign(static_cast<std::size_t>(layer.n_pairs()), iso);
    layer.shared = false;
  }
  return out;
}

ParamCount param_count(const Mera& m) {
  ParamCount pc;
  // Distinct tensors only: scale-invariant layers alias one set of tensors
  // across every layer and must not count it repeatedly.
  std::set<const Tensor*> seen;
  auto count = [&pc, &seen](const std::shared_ptr<const Tensor>& t) {
    if (t && seen.insert(t.get()).second) pc.stored_scalars += t->size();
  };
  for (const auto& layer : m.layers) {
    pc.slots += 2 * layer.n_pairs();
    for (const auto& d : layer.disentanglers) count(d.u);
    for (const auto& iso : layer.isometries) {
      count(iso.w);
      count(iso.parent);
    }
  }
  pc.slots += 1;
  count(m.top.t);
  count(m.top.parent);
  return pc;
}

}  // namespace merakit
