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

// Timing only — nothing here asserts. The interesting shape: reduced density
// matrices come out of a cone whose width stays bounded, so their cost grows
// with the number of layers (log2 n), while the brute-force state grows with
// the full Hilbert space (2^n).

#include <benchmark/benchmark.h>

#include <vector>

#include <Eigen/Dense>

#include "merakit/cone.hpp"
#include "merakit/mera.hpp"
#include "merakit/oracle.hpp"
#include "merakit/renorm.hpp"

namespace {

using namespace merakit;

void BM_BuildGeneric(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_random(n, 2, 7, MeraMode::generic));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_BuildGeneric)->RangeMultiplier(4)->Range(16, 1024)
    ->Complexity(benchmark::oN);

void BM_RdmSingleSite(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mera m = build_random(n, 2, 7, MeraMode::translation_invariant);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdm(m, {n / 2}));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_RdmSingleSite)->RangeMultiplier(2)->Range(64, 16384)
    ->Complexity(benchmark::oLogN);

void BM_RdmAdjacentPair(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mera m = build_random(n, 2, 7, MeraMode::translation_invariant);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdm(m, {n / 2, n / 2 + 1}));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_RdmAdjacentPair)->RangeMultiplier(2)->Range(64, 16384)
    ->Complexity(benchmark::oLogN);

// One generating step of the cone, isolated at a single layer of a large
// network. Every layer should cost about the same: the slice never widens
// beyond a few wires no matter how deep the cone is.
void BM_DescendStep(benchmark::State& state) {
  static Mera m = build_random(4096, 2, 7, MeraMode::translation_invariant);
  int layer = static_cast<int>(state.range(0));
  auto levels = cone_of(m, {m.n_sites / 2});
  ConeSlice above{layer + 1, levels[layer + 1],
                  rdm_at_level(m, layer + 1, levels[layer + 1])};
  for (auto _ : state) {
    benchmark::DoNotOptimize(descend_step(m, layer, above, levels[layer]));
  }
}
BENCHMARK(BM_DescendStep)->DenseRange(0, 10, 1);

void BM_CorrelatorByDistance(benchmark::State& state) {
  static Mera m = build_random(4096, 2, 7, MeraMode::scale_invariant);
  int r = static_cast<int>(state.range(0));
  Eigen::MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(correlator(m, z, z, 0, r));
  }
}
BENCHMARK(BM_CorrelatorByDistance)->RangeMultiplier(4)->Range(1, 1024);

void BM_AscendTwoSite(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mera m = build_random(n, 2, 7, MeraMode::generic);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(4, 4);
  h(0, 0) = 1.0; h(3, 3) = -1.0;
  LocalOperator op = make_local_operator(m, 0, {0, 1}, h);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ascend_operator(m, op));
  }
}
BENCHMARK(BM_AscendTwoSite)->RangeMultiplier(4)->Range(16, 1024);

void BM_ScalingSuperoperator(benchmark::State& state) {
  int chi = static_cast<int>(state.range(0));
  Mera m = build_random(64, chi, 7, MeraMode::scale_invariant);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scaling_superoperator(m));
  }
}
BENCHMARK(BM_ScalingSuperoperator)->DenseRange(2, 4, 1);

// The contrast case: exact state-vector contraction doubles in size per site.
void BM_OracleFullState(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mera m = build_random(n, 2, 7, MeraMode::generic);
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_state(m));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_OracleFullState)->RangeMultiplier(2)->Range(4, 16);

}  // namespace

BENCHMARK_MAIN();
