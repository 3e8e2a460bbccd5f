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

// Simulatable ground truths. A problem is a declared prior belief plus the noise model
// implied by it; truths are drawn from that prior, so posterior summaries computed
// against sampled truths are calibrated by construction.
//
// Shipped families:
//   independent-gaussian   one Gaussian per alternative, optional per-alternative noise
//   correlated-catalysts   7 catalysts in two element groups plus a mixed catalyst
//   grid-2d-exponential    square grid over [0,1]^2 with exponential covariance
//   logistic-binary        sampled belief over logistic success curves, Bernoulli outcomes
//   linear-qsar            indicator features over sites x substituents

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optilearn/belief.hpp"
#include "optilearn/rng.hpp"

namespace optilearn {

class Problem {
 public:
  /// Problem whose truths are drawn from `prior` and whose noise is the prior's noise model.
  Problem(std::string family, BeliefState prior, std::vector<VectorXd> coordinates = {});

  const std::string& family() const { return family_; }
  const BeliefState& prior() const { return sampler_.belief(); }
  std::size_t size() const { return optilearn::size(prior()); }
  const std::vector<std::string>& alternatives() const { return optilearn::alternatives(prior()); }
  /// Grid coordinates per alternative (empty when the family has none).
  const std::vector<VectorXd>& coordinates() const { return coordinates_; }
  bool binary() const;
  /// Gaussian noise std per alternative (0 for noiseless alternatives; empty when binary).
  const VectorXd& noise_stddevs() const { return noise_stddevs_; }

  TruthDraw sample_truth(RandomStream& rng) const { return sampler_.draw(rng); }

  /// One primitive noise draw: standard normal, or uniform for binary problems. Every
  /// observation consumes exactly one, which keeps paired policy comparisons aligned.
  double noise_draw(RandomStream& rng) const;
  /// F(x, W) built from a primitive draw: mu_x + sigma_x z, or 1{u < P(Y=1 | x, theta)}.
  double outcome_from_draw(const TruthDraw& truth, std::size_t x, double draw) const;
  Observation observe(const TruthDraw& truth, std::size_t x, RandomStream& rng) const;

 private:
  std::string family_;
  TruthSampler sampler_;
  std::vector<VectorXd> coordinates_;
  VectorXd noise_stddevs_;
};

inline const std::vector<std::string> kProblemFamilies = {
    "independent-gaussian", "correlated-catalysts", "grid-2d-exponential", "logistic-binary", "linear-qsar",
};

/// {"family": name, "params": {...}}; every parameter has a default. ConfigError with the
/// offending field path on unknown families or invalid parameters.
Problem build_problem(const nlohmann::json& doc, const std::string& path = "problem");

/// Problem whose prior is an existing belief (posterior-as-prior forecasting).
Problem problem_from_belief(const BeliefState& belief, std::vector<VectorXd> coordinates = {});

TruthDraw sample_truth(const Problem& problem, RandomStream& rng);
Observation observe(const Problem& problem, const TruthDraw& truth, std::size_t x, RandomStream& rng);

/// Correlation matrix shipped with the correlated-catalysts family.
MatrixXd catalyst_correlation();

}  // namespace optilearn
