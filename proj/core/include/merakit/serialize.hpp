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

#include <string>

#include "merakit/mera.hpp"

namespace merakit {

// JSON document, version 1. Doubles survive the round trip bit-exactly.
// Parent unitaries are build-time scaffolding and are not written.
std::string serialize(const Mera& m);

// Inverse of serialize. Rejects malformed documents with LoadError naming
// the offending field (e.g. "layers[1].disentanglers[0]"), and re-checks
// numeric constraints at a 1e-8 gate.
Mera deserialize(const std::string& text);

void save_mera(const Mera& m, const std::string& path);
Mera load_mera(const std::string& path);

}  // namespace merakit
