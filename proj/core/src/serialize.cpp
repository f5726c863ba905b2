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

#include "merakit/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "merakit/errors.hpp"

namespace merakit {

namespace {

using json = nlohmann::ordered_json;

json tensor_to_json(const Tensor& t) {
  json out;
  out["shape"] = t.shape();
  json data = json::array();
  for (const auto& v : t.data()) {
    data.push_back(json::array({v.real(), v.imag()}));
  }
  out["data"] = std::move(data);
  return out;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw LoadError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::shared_ptr<const Tensor> tensor_from_json(const json& j,
                                               const std::string& path) {
  if (!j.is_object()) fail(path, "expected a tensor object");
  const json& shape_j = field(j, "shape", path);
  if (!shape_j.is_array() || shape_j.empty()) fail(path + ".shape", "expected a non-empty array");
  std::vector<int> shape;
  std::int64_t total = 1;
  for (const auto& d : shape_j) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1) {
      fail(path + ".shape", "dims must be positive integers");
    }
    shape.push_back(d.get<int>());
    total *= shape.back();
    if (total > (std::int64_t{1} << 30)) fail(path + ".shape", "tensor too large");
  }
  const json& data_j = field(j, "data", path);
  if (!data_j.is_array() || static_cast<std::int64_t>(data_j.size()) != total) {
    std::ostringstream msg;
    msg << "expected " << total << " [re, im] entries";
    fail(path + ".data", msg.str());
  }
  std::vector<cplx> data;
  data.reserve(data_j.size());
  for (std::size_t i = 0; i < data_j.size(); ++i) {
    const json& e = data_j[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      std::ostringstream msg;
      msg << "entry " << i << " is not a [re, im] pair";
      fail(path + ".data", msg.str());
    }
    double re = e[0].get<double>(), im = e[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) {
      std::ostringstream msg;
      msg << "entry " << i << " is not finite";
      fail(path + ".data", msg.str());
    }
    data.emplace_back(re, im);
  }
  return std::make_shared<Tensor>(std::move(shape), std::move(data));
}

}  // namespace

std::string serialize(const Mera& m) {
  check_structure(m);
  json doc;
  doc["version"] = 1;
  doc["n_sites"] = m.n_sites;
  doc["site_dim"] = m.site_dim;
  doc["mode"] = mode_name(m.mode);
  json layers = json::array();
  for (const auto& layer : m.layers) {
    json lj;
    lj["n_wires_in"] = layer.n_wires_in;
    lj["chi_in"] = layer.chi_in;
    lj["chi_out"] = layer.chi_out;
    lj["shared"] = layer.shared;
    json ds = json::array();
    for (const auto& d : layer.disentanglers) ds.push_back(tensor_to_json(*d.u));
    lj["disentanglers"] = std::move(ds);
    json ws = json::array();
    for (const auto& iso : layer.isometries) ws.push_back(tensor_to_json(*iso.w));
    lj["isometries"] = std::move(ws);
    layers.push_back(std::move(lj));
  }
  doc["layers"] = std::move(layers);
  doc["top"] = tensor_to_json(*m.top.t);
  return doc.dump();
}

Mera deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("document root must be an object");

  int version = int_field(doc, "version", "document");
  if (version != 1) {
    std::ostringstream msg;
    msg << "document: unsupported version " << version;
    throw LoadError(msg.str());
  }

  Mera m;
  m.n_sites = int_field(doc, "n_sites", "document");
  m.site_dim = int_field(doc, "site_dim", "document");
  const json& mode_j = field(doc, "mode", "document");
  if (!mode_j.is_string()) throw LoadError("mode: expected a string");
  try {
    m.mode = mode_from_name(mode_j.get<std::string>());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("mode: ") + e.what());
  }

  const json& layers_j = field(doc, "layers", "document");
  if (!layers_j.is_array()) throw LoadError("layers: expected an array");
  for (std::size_t k = 0; k < layers_j.size(); ++k) {
    std::ostringstream base;
    base << "layers[" << k << "]";
    const json& lj = layers_j[k];
    MeraLayer layer;
    layer.n_wires_in = int_field(lj, "n_wires_in", base.str());
    layer.chi_in = int_field(lj, "chi_in", base.str());
    layer.chi_out = int_field(lj, "chi_out", base.str());
    const json& shared_j = field(lj, "shared", base.str());
    if (!shared_j.is_boolean()) fail(base.str() + ".shared", "expected a boolean");
    layer.shared = shared_j.get<bool>();

    const json& ds = field(lj, "disentanglers", base.str());
    if (!ds.is_array()) fail(base.str() + ".disentanglers", "expected an array");
    for (std::size_t j = 0; j < ds.size(); ++j) {
      std::ostringstream p;
      p << base.str() << ".disentanglers[" << j << "]";
      layer.disentanglers.push_back({tensor_from_json(ds[j], p.str())});
    }
    const json& ws = field(lj, "isometries", base.str());
    if (!ws.is_array()) fail(base.str() + ".isometries", "expected an array");
    for (std::size_t j = 0; j < ws.size(); ++j) {
      std::ostringstream p;
      p << base.str() << ".isometries[" << j << "]";
      layer.isometries.push_back({tensor_from_json(ws[j], p.str()), nullptr});
    }
    m.layers.push_back(std::move(layer));
  }
  m.top.t = tensor_from_json(field(doc, "top", "document"), "top");

  try {
    check_structure(m);
  } catch (const StructureError& e) {
    throw LoadError(e.what());
  }

  // Re-establish aliasing so downstream consumers may rely on it.
  if (m.mode == MeraMode::scale_invariant) {
    for (std::size_t k = 1; k < m.layers.size(); ++k) {
      m.layers[k].disentanglers = m.layers[0].disentanglers;
      m.layers[k].isometries = m.layers[0].isometries;
    }
  }

  ValidationReport report = validate(m);
  if (!report.pass(1e-8)) {
    const ConstraintViolation* worst = nullptr;
    for (const auto& entry : report.entries) {
      if (!worst || entry.deviation > worst->deviation) worst = &entry;
    }
    std::ostringstream msg;
    msg << worst->path << ": constraint '" << worst->constraint
        << "' violated by " << worst->deviation << " (gate 1e-8)";
    throw LoadError(msg.str());
  }
  return m;
}

void save_mera(const Mera& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot open for writing: " + path);
  out << serialize(m) << "\n";
  if (!out) throw LoadError("write failed: " + path);
}

Mera load_mera(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace merakit
