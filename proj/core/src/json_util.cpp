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

#include "optilearn/json_util.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "optilearn/errors.hpp"

namespace optilearn::json_util {

json number(double v) {
  if (std::isnan(v)) return json(nullptr);
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

json vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json matrix(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "expected an object" : path + ": expected an object", path);
  auto it = obj.find(key);
  const std::string p = join(path, key);
  if (it == obj.end()) throw ConfigError(p + ": missing required field", p);
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path + ": expected a number", path);
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(path + ": expected an integer", path);
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto& s = v.get_ref<const std::string&>();
      const std::uint64_t out = std::stoull(s, &used, 0);
      if (used == s.size()) return out;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError(path + ": expected an unsigned 64-bit seed", path);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string", path);
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean", path);
  return v.get<bool>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers", path);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(v[i], index(path, i));
  return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of rows", path);
  const std::size_t rows = v.size();
  const std::size_t cols = rows == 0 ? 0 : (v[0].is_array() ? v[0].size() : 0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = index(path, r);
    if (!v[r].is_array() || v[r].size() != cols) throw ConfigError(rp + ": ragged or non-array row", rp);
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_number(v[r][c], index(rp, c));
    }
  }
  return out;
}

std::vector<std::string> as_string_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of strings", path);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], index(path, i)));
  return out;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

std::int64_t integer_or(const json& obj, const std::string& key, std::int64_t fallback, const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_integer(*it, join(path, key));
}

std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string dump_line(const json& doc) { return doc.dump(-1, ' ', false, json::error_handler_t::strict); }

namespace {

// Structural scanner over already-valid JSON text. Tracks the current path and
// reports the line where the target path's value begins.
class PathLocator {
 public:
  PathLocator(const std::string& text, const std::string& target) : text_(text), target_(target) {}

  std::size_t run() {
    skip_ws();
    value("");
    return found_;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        out.push_back(text_[pos_ + 1]);
        pos_ += 2;
        continue;
      }
      out.push_back(text_[pos_++]);
    }
    ++pos_;
    return out;
  }

  void value(const std::string& path) {
    if (found_ != 0 || pos_ >= text_.size()) return;
    if (path == target_) {
      found_ = line_;
      return;
    }
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}' && found_ == 0) {
        const std::size_t key_line = line_;
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        const std::string child = join(path, key);
        if (child == target_) {
          found_ = key_line;
          return;
        }
        value(child);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      std::size_t i = 0;
      while (pos_ < text_.size() && text_[pos_] != ']' && found_ == 0) {
        value(index(path, i++));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
             !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
  }

  const std::string& text_;
  const std::string& target_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t found_ = 0;
};

}  // namespace

std::size_t locate_line(const std::string& text, const std::string& path) {
  if (path.empty()) return 0;
  try {
    return PathLocator(text, path).run();
  } catch (...) {
    return 0;
  }
}

}  // namespace optilearn::json_util
