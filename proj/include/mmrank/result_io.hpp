// Copyright 2026 The mmrank Authors
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
//
// Versioned, diff-friendly result files (JSON) and run manifests with
// content digests, so a manifest plus the referenced inputs pins every
// output byte.

#ifndef MMRANK_RESULT_IO_HPP
#define MMRANK_RESULT_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmrank/model.hpp"

namespace mmrank {

inline constexpr const char* kToolVersion = "mmrank 1.0.0";
inline constexpr const char* kResultFormat = "mmrank-result/1";

// FNV-1a 64-bit content digest, hex encoded.
std::string content_digest(const std::string& bytes);

struct ManifestInput {
  std::string path;
  std::string digest;
};

struct RunManifest {
  std::string command;
  std::vector<ManifestInput> inputs;
  std::vector<std::string> model_labels;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cutoff;
  // Wall-clock timing is recorded only on request: it would otherwise be the
  // one nondeterministic byte in an otherwise reproducible output.
  std::optional<double> timing_seconds;
  std::string json() const;
};

// Result file round trip. The stored result carries the team index so that
// reports can be rebuilt from the file alone.
std::string write_result(const FitResult& fit, const TeamIndex& index,
                         const RunManifest& manifest);

struct StoredResult {
  FitResult fit;
  TeamIndex index;
};
StoredResult read_result(const std::string& json_text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace mmrank

#endif  // MMRANK_RESULT_IO_HPP
