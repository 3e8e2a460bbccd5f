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

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "optilearn/belief.hpp"

namespace testing_support {

inline optilearn::CorrelatedGaussianBelief worked_example() {
  optilearn::CorrelatedGaussianBelief b;
  b.alternatives = {"x1", "x2", "x3"};
  b.mean = Eigen::Vector3d(20, 16, 22);
  b.covariance.resize(3, 3);
  b.covariance << 12, 6, 3, 6, 7, 4, 3, 4, 15;
  b.noise_variance = 9;
  return b;
}

inline std::vector<std::string> names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("a" + std::to_string(i));
  return out;
}

inline optilearn::IndependentGaussianBelief independent(std::vector<double> means, std::vector<double> precisions,
                                                        double noise_precision) {
  return optilearn::IndependentGaussianBelief::make(
      names(means.size()), Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size())),
      Eigen::Map<Eigen::VectorXd>(precisions.data(), static_cast<Eigen::Index>(precisions.size())), noise_precision);
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("optilearn-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
