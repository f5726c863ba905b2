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

#include <cstdio>
#include <string>

#include <json.hpp>

#include "merakit/errors.hpp"
#include "merakit/mera.hpp"
#include "merakit/serialize.hpp"

using namespace merakit;
using nlohmann::ordered_json;

namespace {

bool tensors_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && a.data() == b.data();
}

bool meras_equal(const Mera& a, const Mera& b) {
  if (a.n_sites != b.n_sites || a.site_dim != b.site_dim || a.mode != b.mode ||
      a.n_layers() != b.n_layers()) {
    return false;
  }
  for (int k = 0; k < a.n_layers(); ++k) {
    const auto& la = a.layers[k];
    const auto& lb = b.layers[k];
    if (la.n_wires_in != lb.n_wires_in || la.chi_in != lb.chi_in ||
        la.chi_out != lb.chi_out || la.shared != lb.shared ||
        la.disentanglers.size() != lb.disentanglers.size() ||
        la.isometries.size() != lb.isometries.size()) {
      return false;
    }
    for (std::size_t j = 0; j < la.disentanglers.size(); ++j) {
      if (!tensors_equal(*la.disentanglers[j].u, *lb.disentanglers[j].u)) return false;
    }
    for (std::size_t j = 0; j < la.isometries.size(); ++j) {
      if (!tensors_equal(*la.isometries[j].w, *lb.isometries[j].w)) return false;
    }
  }
  return tensors_equal(*a.top.t, *b.top.t);
}

}  // namespace

TEST_CASE("serialize round-trips bit-exactly across modes and dims") {
  std::vector<Mera> cases;
  cases.push_back(build_random(8, 2, 42, MeraMode::generic));
  cases.push_back(build_random(16, 2, 7, MeraMode::translation_invariant));
  cases.push_back(build_random(8, 2, 9, MeraMode::scale_invariant));
  cases.push_back(build_random(16, std::vector<int>{2, 4, 3, 2}, 5, MeraMode::generic));
  cases.push_back(build_product(8, 2));
  for (const Mera& m : cases) {
    std::string text = serialize(m);
    Mera back = deserialize(text);
    CHECK(meras_equal(m, back));
    // a second trip produces the identical document
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("parents are scaffolding and are not serialized") {
  BuildOptions opts;
  opts.keep_parents = true;
  Mera m = build_random(8, 2, 3, MeraMode::generic, opts);
  Mera back = deserialize(serialize(m));
  CHECK(meras_equal(m, back));
  for (const auto& layer : back.layers) {
    for (const auto& iso : layer.isometries) CHECK(iso.parent == nullptr);
  }
  CHECK(back.top.parent == nullptr);
}

TEST_CASE("scale invariant documents re-establish tensor aliasing") {
  Mera m = build_random(16, 2, 21, MeraMode::scale_invariant);
  Mera back = deserialize(serialize(m));
  for (const auto& layer : back.layers) {
    CHECK(layer.disentanglers[0].u == back.layers[0].disentanglers[0].u);
    CHECK(layer.isometries[0].w == back.layers[0].isometries[0].w);
  }
  ParamCount pc = param_count(back);
  CHECK(pc.stored_scalars == 16 + 8 + 4);
}

TEST_CASE("document shape matches the format contract") {
  Mera m = build_random(8, 2, 1, MeraMode::translation_invariant);
  ordered_json doc = ordered_json::parse(serialize(m));
  CHECK(doc["version"] == 1);
  CHECK(doc["n_sites"] == 8);
  CHECK(doc["site_dim"] == 2);
  CHECK(doc["mode"] == "translation_invariant");
  CHECK(doc["layers"].size() == 2);
  CHECK(doc["layers"][0]["n_wires_in"] == 8);
  CHECK(doc["layers"][0]["shared"] == true);
  CHECK(doc["layers"][0]["disentanglers"].size() == 1);  // shared: one entry
  CHECK(doc["layers"][0]["disentanglers"][0]["shape"] ==
        ordered_json::array({2, 2, 2, 2}));
  CHECK(doc["layers"][0]["disentanglers"][0]["data"].size() == 16);
  CHECK(doc["layers"][0]["disentanglers"][0]["data"][0].size() == 2);
  CHECK(doc["top"]["shape"] == ordered_json::array({2, 2}));
}

TEST_CASE("load failures name the offending path") {
  Mera m = build_random(8, 2, 13, MeraMode::generic);

  auto expect_load_error = [](ordered_json doc, const std::string& fragment) {
    try {
      deserialize(doc.dump());
      FAIL("expected LoadError for fragment: " << fragment);
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  ordered_json doc = ordered_json::parse(serialize(m));
  doc.erase("layers");
  expect_load_error(doc, "layers");

  doc = ordered_json::parse(serialize(m));
  doc["version"] = 2;
  expect_load_error(doc, "version");

  doc = ordered_json::parse(serialize(m));
  doc["layers"][1]["disentanglers"][0]["data"][3] = ordered_json::array({1.0});
  expect_load_error(doc, "layers[1].disentanglers[0]");

  doc = ordered_json::parse(serialize(m));
  doc["layers"][0]["isometries"][2]["shape"] = ordered_json::array({2, 2});
  expect_load_error(doc, "layers[0].isometries[2]");

  doc = ordered_json::parse(serialize(m));
  doc["top"]["data"][0][0] = "oops";
  expect_load_error(doc, "top");

  CHECK_THROWS_AS(deserialize("this is not json"), LoadError);
  CHECK_THROWS_AS(deserialize("[1,2,3]"), LoadError);
}

TEST_CASE("numerically broken documents are rejected at the load gate") {
  Mera m = build_random(8, 2, 13, MeraMode::generic);
  ordered_json doc = ordered_json::parse(serialize(m));
  // nudge one isometry entry hard enough to break the constraint
  double re = doc["layers"][0]["isometries"][0]["data"][0][0].get<double>();
  doc["layers"][0]["isometries"][0]["data"][0][0] = re + 1e-3;
  try {
    deserialize(doc.dump());
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    std::string what = e.what();
    CHECK(what.find("layers[0].isometries[0]") != std::string::npos);
  }

  // a nudge below the 1e-8 gate loads fine
  ordered_json doc2 = ordered_json::parse(serialize(m));
  double re2 = doc2["layers"][0]["isometries"][0]["data"][0][0].get<double>();
  doc2["layers"][0]["isometries"][0]["data"][0][0] = re2 + 1e-10;
  CHECK_NOTHROW(deserialize(doc2.dump()));

  // non-finite entries are rejected outright
  ordered_json doc3 = ordered_json::parse(serialize(m));
  doc3["top"]["data"][0][0] = std::numeric_limits<double>::quiet_NaN();
  // nlohmann prints NaN as null; either way the document must not load
  CHECK_THROWS_AS(deserialize(doc3.dump()), LoadError);
}

TEST_CASE("save and load through a file") {
  Mera m = build_random(8, 2, 77, MeraMode::scale_invariant);
  std::string path = "merakit_test_roundtrip.json";
  save_mera(m, path);
  Mera back = load_mera(path);
  CHECK(meras_equal(m, back));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_mera("does_not_exist_anywhere.json"), LoadError);
}
