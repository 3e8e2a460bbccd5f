// Copyright 2026 The Optilearn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// optilearn command line: bench, risk, advise, serve.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "optilearn/config.hpp"

namespace optilearn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Output file name -> contents, in the order they are written.
using OutputFiles = std::map<std::string, std::string>;

/// Hash of the canonical configuration echo, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Comparison tables (CSV and/or JSON per config.output.format), pairwise differences,
/// traces on request, tuning tables when a tuning block is present, and manifest.json.
OutputFiles bench_outputs(const RunConfig& config, int parallel = 1);

/// Threshold probability and histograms for every policy and budget variant.
/// ConfigError when the configuration has no threshold.
OutputFiles risk_outputs(const RunConfig& config, int parallel = 1);

/// Writes files under `dir`, creating it when needed.
void write_outputs(const std::string& dir, const OutputFiles& files);

/// Entry point used by main(); streams replace stdout/stderr in tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optilearn::cli
