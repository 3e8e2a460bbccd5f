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

// Small helpers shared by every JSON document the library reads or writes.
// Non-finite numbers travel as the strings "inf" / "-inf" since JSON has no literal for them.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace optilearn::json_util {

using nlohmann::json;

json number(double v);
json vector(const Eigen::VectorXd& v);
json matrix(const Eigen::MatrixXd& m);

/// Field access that throws ConfigError naming `path` on absence or type mismatch.
const json& require(const json& obj, const std::string& key, const std::string& path);
double as_number(const json& v, const std::string& path);
std::int64_t as_integer(const json& v, const std::string& path);
std::uint64_t as_seed(const json& v, const std::string& path);
std::string as_string(const json& v, const std::string& path);
bool as_bool(const json& v, const std::string& path);
Eigen::VectorXd as_vector(const json& v, const std::string& path);
Eigen::MatrixXd as_matrix(const json& v, const std::string& path);
std::vector<std::string> as_string_list(const json& v, const std::string& path);

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path);
std::int64_t integer_or(const json& obj, const std::string& key, std::int64_t fallback, const std::string& path);

std::string join(const std::string& path, const std::string& key);
std::string index(const std::string& path, std::size_t i);

/// Shortest decimal text that reads back to the same double ("inf", "-inf", "nan" otherwise).
std::string number_text(double v);

/// One line of JSON, keys sorted (nlohmann's default object ordering).
std::string dump_line(const json& doc);

/// Line (1-based) of the value addressed by a path such as "policies[1].kind"
/// inside `text`, or 0 when the path cannot be located.
std::size_t locate_line(const std::string& text, const std::string& path);

}  // namespace optilearn::json_util
