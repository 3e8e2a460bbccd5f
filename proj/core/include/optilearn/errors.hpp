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

#include <stdexcept>
#include <string>
#include <string_view>

namespace optilearn {

/// Failure categories shared by the library, the CLI and the HTTP service.
enum class ErrorCode {
  kDomain,       // value outside the belief's or problem's space
  kInput,        // malformed or out-of-range argument
  kNumerical,    // numerically broken state (degenerate denominators, lost PSD)
  kInference,    // observation impossible under every candidate
  kUnsupported,  // operation not defined for this belief representation
  kConfig,       // invalid run configuration or declaration
  kConflict,     // state forbids the request (budget exhausted, duplicate id)
  kNotFound,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field_path = {})
      : std::runtime_error(message), code_(code), field_path_(std::move(field_path)) {}

  ErrorCode code() const noexcept { return code_; }
  /// JSON-style path of the offending field (e.g. "prior.precisions[1]"); may be empty.
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  ErrorCode code_;
  std::string field_path_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m, std::string path = {})
      : Error(ErrorCode::kDomain, m, std::move(path)) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& m, std::string path = {})
      : Error(ErrorCode::kInput, m, std::move(path)) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m) : Error(ErrorCode::kNumerical, m) {}
};

class InferenceError : public Error {
 public:
  explicit InferenceError(const std::string& m) : Error(ErrorCode::kInference, m) {}
};

class UnsupportedBeliefError : public Error {
 public:
  explicit UnsupportedBeliefError(const std::string& m) : Error(ErrorCode::kUnsupported, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m, std::string path = {})
      : Error(ErrorCode::kConfig, m, std::move(path)) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& m, std::string path = {})
      : Error(ErrorCode::kConflict, m, std::move(path)) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& m, std::string path = {})
      : Error(ErrorCode::kNotFound, m, std::move(path)) {}
};

}  // namespace optilearn
