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

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "merakit/tensor.hpp"

namespace merakit {

// Layered binary coarse-graining network on a periodic chain of n_sites
// wires. Layer k maps the n_sites/2^k wires of level k to half as many
// wires of level k+1; after the last layer two wires remain and meet the
// top tensor. Level 0 is the physical lattice.

enum class MeraMode { generic, translation_invariant, scale_invariant };

std::string mode_name(MeraMode mode);
MeraMode mode_from_name(const std::string& name);

struct LayerWiring {
  int n_wires = 0;
  // disentangler j touches fine wires (2j+1, (2j+2) mod n)
  std::vector<std::array<int, 2>> disentangler_wires;
  // isometry j emits fine wires (2j, 2j+1) and feeds coarse wire j
  std::vector<std::array<int, 2>> isometry_wires;
};

// The fixed brick pattern of one layer; periodic, n_wires even and >= 4.
LayerWiring wiring(int n_wires);

// One slot of the pattern without materializing the whole layer: the two
// fine wires of disentangler j, and the unique disentangler touching a wire.
std::array<int, 2> disentangler_wires_of(int n_wires, int j);
int disentangler_at_wire(int n_wires, int wire);

struct Disentangler {
  std::shared_ptr<const Tensor> u;  // (out1, out2, in1, in2), unitary
};

struct Isometry {
  std::shared_ptr<const Tensor> w;  // (out1, out2, in), columns orthonormal
  // (out1, out2, in, anc) unitary whose anc=0 slice is w; null unless the
  // builder was asked to keep it.
  std::shared_ptr<const Tensor> parent;
};

struct TopTensor {
  std::shared_ptr<const Tensor> t;  // (out1, out2), unit Frobenius norm
  // (out1, out2, anc1, anc2) unitary whose (anc1, anc2) = (0, 0) slice is t.
  std::shared_ptr<const Tensor> parent;
};

struct MeraLayer {
  int n_wires_in = 0;
  int chi_in = 0;   // wire dim entering from below
  int chi_out = 0;  // wire dim emitted upward
  bool shared = false;  // one stored tensor serves every slot of its kind
  std::vector<Disentangler> disentanglers;  // size 1 if shared, else n_pairs
  std::vector<Isometry> isometries;

  int n_pairs() const { return n_wires_in / 2; }
  const Disentangler& disentangler(int j) const;
  const Isometry& isometry_slot(int j) const;
};

struct Mera {
  int n_sites = 0;
  int site_dim = 0;
  MeraMode mode = MeraMode::generic;
  std::vector<MeraLayer> layers;  // fine to coarse
  TopTensor top;

  int n_layers() const { return static_cast<int>(layers.size()); }
  // Levels run 0 (physical wires) .. n_layers() (the two wires under the
  // top tensor).
  int n_levels() const { return n_layers() + 1; }
  int wires_at_level(int level) const;
  int dim_at_level(int level) const;
};

// Shape and chaining consistency; throws StructureError naming the first
// offending piece. Numeric constraints are validate()'s job.
void check_structure(const Mera& m);

struct ConstraintViolation {
  std::string path;        // e.g. "layers[1].isometries[0]"
  std::string constraint;  // e.g. "isometry", "unitary", "parent_slice"
  double deviation = 0.0;
};

struct ValidationReport {
  std::vector<ConstraintViolation> entries;  // one per (tensor, constraint)
  double worst = 0.0;
  bool pass(double tol = 1e-10) const { return worst <= tol; }
};

ValidationReport validate(const Mera& m);

struct BuildOptions {
  bool keep_parents = false;
  int site_dim = 0;  // 0 means: same as chi
};

// Random network, deterministic in (shape, seed, mode). Tensors are drawn
// as slices of Haar-style random unitaries so constraints hold to roundoff.
Mera build_random(int n_sites, int chi, std::uint64_t seed, MeraMode mode,
                  const BuildOptions& options = {});

// Generalized wire dims: level_dims[k] is the wire dimension at level k
// (level 0 = physical). Needs one entry per level. scale_invariant requires
// all entries equal.
Mera build_random(int n_sites, const std::vector<int>& level_dims,
                  std::uint64_t seed, MeraMode mode,
                  const BuildOptions& options = {});

// Identity disentanglers, copy isometries, |00> top: the exact product
// state |0...0>. Scale invariant by construction.
Mera build_product(int n_sites, int chi, bool keep_parents = false);

// Logical copy with per-slot tensor lists (mode becomes generic). Storage
// is shared; counts change, values do not.
Mera expand_shared(const Mera& m);

struct ParamCount {
  std::int64_t slots = 0;           // logical gate slots incl. the top
  std::int64_t stored_scalars = 0;  // complex entries actually stored
};
ParamCount param_count(const Mera& m);

}  // namespace merakit
