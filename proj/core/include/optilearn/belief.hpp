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

// Belief states over unknown truths and their Bayesian transition functions.
//
// Four representations are supported:
//   * IndependentGaussianBelief: lookup table, one Gaussian per alternative,
//     tracked as (mean, precision) with experimental noise precision beta^W.
//   * CorrelatedGaussianBelief: lookup table with a full covariance matrix.
//   * LinearGaussianBelief: Bayesian linear model over a declared feature map,
//     updated with the recursive least-squares recursion; Sigma^theta = B * sigma_eps^2.
//   * SampledBelief: discrete distribution over K candidate parameter vectors of a
//     parametric response model, updated with Bayes' theorem.
//
// Beliefs are plain values. Every update returns a new state and leaves its input
// untouched, so hypothetical updates and event replay need no copies by the caller.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "optilearn/rng.hpp"

namespace optilearn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct IndependentGaussianBelief {
  std::vector<std::string> alternatives;
  VectorXd means;
  /// beta_x = 1 / variance. +inf marks an alternative whose value is known exactly.
  VectorXd precisions;
  /// beta^W_x per alternative; a shared noise precision is stored repeated.
  VectorXd noise_precisions;

  static IndependentGaussianBelief make(std::vector<std::string> alternatives, VectorXd means,
                                        VectorXd precisions, double noise_precision);
  std::size_t size() const { return alternatives.size(); }
  void validate() const;
};

struct CorrelatedGaussianBelief {
  std::vector<std::string> alternatives;
  VectorXd mean;
  MatrixXd covariance;
  double noise_variance = 0.0;

  std::size_t size() const { return alternatives.size(); }
  void validate() const;
};

/// Declared mapping from a control vector x to the feature vector phi(x).
struct FeatureMap {
  enum class Kind {
    kIdentity,    // phi(x) = x
    kAffine,      // phi(x) = (1, x)
    kPolynomial,  // scalar x: (1, x, x^2, ..., x^degree)
    kIndicator,   // x_j is the level chosen at site j: (1, one-hot(x_1), ..., one-hot(x_J))
  };

  Kind kind = Kind::kIdentity;
  int input_dim = 1;
  int degree = 1;
  std::vector<int> levels;

  std::size_t feature_count() const;
  VectorXd operator()(const VectorXd& x) const;
  void validate() const;
};

struct LinearGaussianBelief {
  std::vector<std::string> alternatives;
  /// Control vector of each alternative; policies choose among these.
  std::vector<VectorXd> designs;
  VectorXd coefficient_mean;
  /// B^n; the coefficient covariance is B^n * noise_variance.
  MatrixXd scaled_covariance;
  double noise_variance = 1.0;
  FeatureMap feature_map;

  std::size_t size() const { return alternatives.size(); }
  void validate() const;
  double predict(const VectorXd& controls) const;
};

/// Parametric family used by the sampled belief model.
struct ResponseModel {
  enum class Kind {
    kLogistic,      // P(Y=1 | s, x, theta) = sigmoid(theta . (s, x)); binary outcomes
    kLinear,        // F(x | theta) = theta . (s, x); Gaussian noise
    kGaussianPeak,  // F(x | theta) = theta_0 * exp(-(x_0 - theta_1)^2 / (2 theta_2^2)); Gaussian noise
  };

  Kind kind = Kind::kLogistic;
  /// sigma_eps^2 for the real-valued kinds.
  double noise_variance = 1.0;

  bool binary() const { return kind == Kind::kLogistic; }
  /// Success probability (logistic) or mean response F(x | theta).
  double mean(const VectorXd& state, const VectorXd& controls, const VectorXd& theta) const;
  /// P(y | theta, s, x): Bernoulli mass for binary models, Gaussian density otherwise.
  double likelihood(double y, double mean_response) const;
  std::size_t parameter_count(std::size_t state_dim, std::size_t control_dim) const;
};

struct SampledBelief {
  std::vector<std::string> alternatives;
  std::vector<VectorXd> designs;
  /// Observable state features s held fixed for alternative scoring.
  VectorXd state;
  std::vector<VectorXd> candidates;
  VectorXd probabilities;
  ResponseModel model;

  std::size_t size() const { return alternatives.size(); }
  void validate() const;
  /// F(x_alt | theta_k) for every candidate k.
  VectorXd candidate_means(std::size_t alternative) const;
};

using BeliefState =
    std::variant<IndependentGaussianBelief, CorrelatedGaussianBelief, LinearGaussianBelief, SampledBelief>;

struct Observation {
  std::size_t index = 0;  // n
  std::string alternative;
  double outcome = 0.0;
  std::optional<double> duration;
  std::optional<double> cost;
};

/// Throws InputError unless indices are strictly increasing.
void validate_history(const std::vector<Observation>& history);

struct Predictive {
  double mean = 0.0;
  double variance = 0.0;
};

struct NormalPrior {
  double mean = 0.0;
  double stddev = 0.0;
};

// --- transitions ----------------------------------------------------------

IndependentGaussianBelief update_independent(const IndependentGaussianBelief& belief, std::size_t x, double w);
CorrelatedGaussianBelief update_correlated(const CorrelatedGaussianBelief& belief, std::size_t x, double w);
LinearGaussianBelief update_linear(const LinearGaussianBelief& belief, const VectorXd& controls, double y);
SampledBelief update_sampled(const SampledBelief& belief, const VectorXd& state, const VectorXd& controls,
                             double y);

/// Dispatches to the matching update for alternative `x` (linear and sampled beliefs
/// use the alternative's declared design; sampled beliefs use their stored state).
BeliefState update(const BeliefState& belief, std::size_t x, double outcome);

// --- priors ---------------------------------------------------------------

/// Cov(x, x') = sigma_x sigma_x' exp(-beta |x - x'|), Euclidean distance for vector controls.
MatrixXd exponential_covariance_prior(const std::vector<VectorXd>& points, const VectorXd& sigmas, double beta);

/// Reads [lo, hi] as a central interval of a normal at the given confidence level.
NormalPrior prior_from_interval(double lo, double hi, double confidence);

// --- queries --------------------------------------------------------------

std::size_t size(const BeliefState& belief);
const std::vector<std::string>& alternatives(const BeliefState& belief);
std::string_view kind_name(const BeliefState& belief);
void validate(const BeliefState& belief);

/// Index of a named alternative; DomainError if unknown.
std::size_t alternative_index(const BeliefState& belief, std::string_view name);

/// Marginal predictive distribution of the next outcome at alternative x.
Predictive predictive_params(const BeliefState& belief, std::size_t x);
/// Linear-model predictive at arbitrary controls.
Predictive predictive_params(const LinearGaussianBelief& belief, const VectorXd& controls);

/// theta^n_x for every alternative (mixture means for sampled beliefs).
VectorXd point_estimates(const BeliefState& belief);

/// sigma^n_x: posterior std of the unknown truth at each alternative. Throws
/// UnsupportedBeliefError for sampled beliefs, which carry no per-alternative std.
VectorXd posterior_stddevs(const BeliefState& belief);

/// Posterior std of mu_x for every representation; sampled beliefs report the spread of
/// F(x | theta_k) under p_k.
VectorXd truth_stddevs(const BeliefState& belief);

/// P(mu_x < value) + tie_u * P(mu_x = value) under the belief. With tie_u ~ U(0,1) this is
/// a randomized PIT, uniform when value is a draw from the belief.
double truth_cdf(const BeliefState& belief, std::size_t x, double value, double tie_u);

/// For Gaussian beliefs the one-step-ahead mean vector after measuring x is
/// theta + d * Z with Z ~ N(0, 1); returns d. Empty for sampled beliefs.
std::optional<VectorXd> update_direction(const BeliefState& belief, std::size_t x);

/// Factor L with L L^T = S for a symmetric PSD S (eigen-based, tolerant of rank loss).
/// Throws NumericalError if the smallest eigenvalue is below -1e-9 * trace.
MatrixXd psd_factor(const MatrixXd& covariance);

/// One joint draw of the unknown truth from a belief.
struct TruthDraw {
  VectorXd mu;                 // true performance per alternative
  VectorXd theta;              // true coefficients (linear / sampled beliefs)
  std::optional<std::size_t> candidate;  // sampled beliefs: index of the true theta_k
};

/// Draws truths from a belief; factorizations are computed once at construction.
class TruthSampler {
 public:
  explicit TruthSampler(BeliefState belief);
  TruthDraw draw(RandomStream& rng) const;
  const BeliefState& belief() const { return belief_; }

 private:
  BeliefState belief_;
  MatrixXd factor_;
};

// --- serialization --------------------------------------------------------

inline constexpr int kBeliefSchemaVersion = 1;

nlohmann::json to_json(const BeliefState& belief);
/// Parses a versioned belief document. `alternatives` may be omitted when a default
/// list is supplied. Errors carry field paths.
BeliefState belief_from_json(const nlohmann::json& doc, const std::vector<std::string>* default_alternatives = nullptr);

}  // namespace optilearn
