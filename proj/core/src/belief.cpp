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

#include "optilearn/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"
#include "optilearn/normal.hpp"

namespace optilearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Full eigenvalue PSD verification after correlated updates up to this size; larger
// matrices get the (necessary) diagonal check only.
constexpr Eigen::Index kFullPsdCheckLimit = 100;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string at(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

void check_alternative(std::size_t x, std::size_t n) {
  if (x >= n) throw DomainError("unknown alternative index " + std::to_string(x));
}

void check_unique_names(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw InputError("alternative names must be nonempty", at("alternatives", i));
    for (std::size_t j = 0; j < i; ++j) {
      if (names[i] == names[j]) throw InputError("duplicate alternative name '" + names[i] + "'", at("alternatives", i));
    }
  }
}

double matrix_scale(const MatrixXd& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

void check_symmetric(const MatrixXd& m, const std::string& field) {
  if (m.rows() != m.cols()) throw InputError("matrix must be square", field);
  if (!m.allFinite()) throw InputError("matrix entries must be finite", field);
  const double tol = 1e-9 * matrix_scale(m);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = r + 1; c < m.cols(); ++c) {
      if (std::abs(m(r, c) - m(c, r)) > tol) throw InputError("matrix is not symmetric", field);
    }
  }
}

double psd_tolerance(const MatrixXd& m) { return 1e-9 * std::max(std::abs(m.trace()), 1e-300); }

void check_psd(const MatrixXd& m, const std::string& field) {
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -psd_tolerance(m)) {
    throw InputError("matrix is not positive semidefinite", field);
  }
}

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

VectorXd concat(const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

// sigma-tilde^2 for an independent alternative, with the known-value limits.
double independent_change_variance(double beta, double beta_w) {
  if (std::isinf(beta)) return 0.0;
  if (std::isinf(beta_w)) return 1.0 / beta;
  return 1.0 / beta - 1.0 / (beta + beta_w);
}

}  // namespace

// --- IndependentGaussianBelief -------------------------------------------

IndependentGaussianBelief IndependentGaussianBelief::make(std::vector<std::string> alternatives, VectorXd means,
                                                          VectorXd precisions, double noise_precision) {
  IndependentGaussianBelief b;
  const auto n = static_cast<Eigen::Index>(alternatives.size());
  b.alternatives = std::move(alternatives);
  b.means = std::move(means);
  b.precisions = std::move(precisions);
  b.noise_precisions = VectorXd::Constant(n, noise_precision);
  b.validate();
  return b;
}

void IndependentGaussianBelief::validate() const {
  check_unique_names(alternatives);
  const auto n = static_cast<Eigen::Index>(alternatives.size());
  if (n == 0) throw InputError("belief needs at least one alternative", "alternatives");
  if (means.size() != n) throw InputError("means length differs from alternatives", "means");
  if (precisions.size() != n) throw InputError("precisions length differs from alternatives", "precisions");
  if (noise_precisions.size() != n) throw InputError("noise precision length differs from alternatives", "noise_precisions");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isfinite(means[i])) throw InputError("means must be finite", at("means", k));
    if (!(precisions[i] > 0)) throw InputError("precisions must be strictly positive", at("precisions", k));
    if (!(noise_precisions[i] > 0)) throw InputError("noise precision must be strictly positive", at("noise_precisions", k));
  }
}

// --- CorrelatedGaussianBelief --------------------------------------------

void CorrelatedGaussianBelief::validate() const {
  check_unique_names(alternatives);
  const auto n = static_cast<Eigen::Index>(alternatives.size());
  if (n == 0) throw InputError("belief needs at least one alternative", "alternatives");
  if (mean.size() != n) throw InputError("mean length differs from alternatives", "mean");
  if (!mean.allFinite()) throw InputError("mean must be finite", "mean");
  if (covariance.rows() != n || covariance.cols() != n) throw InputError("covariance must be M x M", "covariance");
  check_symmetric(covariance, "covariance");
  check_psd(covariance, "covariance");
  if (!(noise_variance >= 0) || !std::isfinite(noise_variance)) {
    throw InputError("noise variance must be finite and nonnegative", "noise_variance");
  }
}

// --- FeatureMap ----------------------------------------------------------

std::size_t FeatureMap::feature_count() const {
  switch (kind) {
    case Kind::kIdentity: return static_cast<std::size_t>(input_dim);
    case Kind::kAffine: return static_cast<std::size_t>(input_dim) + 1;
    case Kind::kPolynomial: return static_cast<std::size_t>(degree) + 1;
    case Kind::kIndicator: {
      std::size_t f = 1;
      for (int l : levels) f += static_cast<std::size_t>(l);
      return f;
    }
  }
  return 0;
}

void FeatureMap::validate() const {
  if (input_dim < 1) throw InputError("feature map input_dim must be >= 1", "feature_map.input_dim");
  if (kind == Kind::kPolynomial) {
    if (input_dim != 1) throw InputError("polynomial features need scalar controls", "feature_map.input_dim");
    if (degree < 0) throw InputError("polynomial degree must be >= 0", "feature_map.degree");
  }
  if (kind == Kind::kIndicator) {
    if (levels.size() != static_cast<std::size_t>(input_dim)) {
      throw InputError("indicator features need one level count per site", "feature_map.levels");
    }
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (levels[j] < 1) throw InputError("level counts must be >= 1", at("feature_map.levels", j));
    }
  }
}

VectorXd FeatureMap::operator()(const VectorXd& x) const {
  if (x.size() != input_dim) {
    throw DomainError("controls have length " + std::to_string(x.size()) + ", feature map expects " +
                      std::to_string(input_dim));
  }
  switch (kind) {
    case Kind::kIdentity: return x;
    case Kind::kAffine: {
      VectorXd out(input_dim + 1);
      out << 1.0, x;
      return out;
    }
    case Kind::kPolynomial: {
      VectorXd out(degree + 1);
      double p = 1.0;
      for (int d = 0; d <= degree; ++d, p *= x[0]) out[d] = p;
      return out;
    }
    case Kind::kIndicator: {
      VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(feature_count()));
      out[0] = 1.0;
      Eigen::Index offset = 1;
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const double v = x[static_cast<Eigen::Index>(j)];
        const int level = static_cast<int>(v);
        if (level != v || level < 0 || level >= levels[j]) {
          throw DomainError("site " + std::to_string(j) + " level " + std::to_string(v) + " out of range");
        }
        out[offset + level] = 1.0;
        offset += levels[j];
      }
      return out;
    }
  }
  return x;
}

// --- LinearGaussianBelief ------------------------------------------------

void LinearGaussianBelief::validate() const {
  check_unique_names(alternatives);
  feature_map.validate();
  const auto f = static_cast<Eigen::Index>(feature_map.feature_count());
  if (designs.size() != alternatives.size()) throw InputError("one design per alternative required", "designs");
  for (std::size_t i = 0; i < designs.size(); ++i) {
    if (designs[i].size() != feature_map.input_dim) throw InputError("design length differs from input_dim", at("designs", i));
    try {
      (void)feature_map(designs[i]);
    } catch (const DomainError& e) {
      throw InputError(e.what(), at("designs", i));
    }
  }
  if (coefficient_mean.size() != f) throw InputError("coefficient_mean length differs from feature count", "coefficient_mean");
  if (!coefficient_mean.allFinite()) throw InputError("coefficient_mean must be finite", "coefficient_mean");
  if (scaled_covariance.rows() != f || scaled_covariance.cols() != f) {
    throw InputError("scaled_covariance must be F x F", "scaled_covariance");
  }
  check_symmetric(scaled_covariance, "scaled_covariance");
  check_psd(scaled_covariance, "scaled_covariance");
  if (!(noise_variance > 0) || !std::isfinite(noise_variance)) {
    throw InputError("noise variance must be finite and positive", "noise_variance");
  }
}

double LinearGaussianBelief::predict(const VectorXd& controls) const {
  return feature_map(controls).dot(coefficient_mean);
}

// --- ResponseModel / SampledBelief ---------------------------------------

std::size_t ResponseModel::parameter_count(std::size_t state_dim, std::size_t control_dim) const {
  return kind == Kind::kGaussianPeak ? 3 : state_dim + control_dim;
}

double ResponseModel::mean(const VectorXd& state, const VectorXd& controls, const VectorXd& theta) const {
  switch (kind) {
    case Kind::kLogistic: return sigmoid(theta.dot(concat(state, controls)));
    case Kind::kLinear: return theta.dot(concat(state, controls));
    case Kind::kGaussianPeak: {
      const double d = controls[0] - theta[1];
      return theta[0] * std::exp(-d * d / (2.0 * theta[2] * theta[2]));
    }
  }
  return 0.0;
}

double ResponseModel::likelihood(double y, double mean_response) const {
  if (binary()) {
    if (y == 1.0) return mean_response;
    if (y == 0.0) return 1.0 - mean_response;
    throw InputError("binary response model expects outcome 0 or 1");
  }
  const double r = y - mean_response;
  return std::exp(-0.5 * r * r / noise_variance) / std::sqrt(2.0 * std::numbers::pi * noise_variance);
}

void SampledBelief::validate() const {
  check_unique_names(alternatives);
  if (designs.size() != alternatives.size()) throw InputError("one design per alternative required", "designs");
  if (candidates.empty()) throw InputError("sampled belief needs K >= 1 candidates", "candidates");
  if (probabilities.size() != static_cast<Eigen::Index>(candidates.size())) {
    throw InputError("probabilities length differs from candidates", "probabilities");
  }
  if (!model.binary() && (!(model.noise_variance > 0) || !std::isfinite(model.noise_variance))) {
    throw InputError("noise variance must be finite and positive", "response_model.noise_variance");
  }
  const std::size_t control_dim = designs.empty() ? 0 : static_cast<std::size_t>(designs[0].size());
  for (std::size_t i = 0; i < designs.size(); ++i) {
    if (static_cast<std::size_t>(designs[i].size()) != control_dim) throw InputError("designs must share a length", at("designs", i));
    if (model.kind == ResponseModel::Kind::kGaussianPeak && control_dim < 1) {
      throw InputError("gaussian_peak needs at least one control", at("designs", i));
    }
  }
  const std::size_t params = model.parameter_count(static_cast<std::size_t>(state.size()), control_dim);
  double total = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (static_cast<std::size_t>(candidates[k].size()) != params) {
      throw InputError("candidate needs " + std::to_string(params) + " parameters", at("candidates", k));
    }
    if (!candidates[k].allFinite()) throw InputError("candidate parameters must be finite", at("candidates", k));
    const double p = probabilities[static_cast<Eigen::Index>(k)];
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("probabilities must lie in [0, 1]", at("probabilities", k));
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("probabilities must sum to 1", "probabilities");
}

VectorXd SampledBelief::candidate_means(std::size_t alternative) const {
  check_alternative(alternative, size());
  VectorXd out(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = model.mean(state, designs[alternative], candidates[k]);
  }
  return out;
}

void validate_history(const std::vector<Observation>& history) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].index <= history[i - 1].index) {
      throw InputError("observation indices must be strictly increasing", at("history", i));
    }
  }
}

// --- transitions ----------------------------------------------------------

IndependentGaussianBelief update_independent(const IndependentGaussianBelief& belief, std::size_t x, double w) {
  check_alternative(x, belief.size());
  if (!std::isfinite(w)) throw InputError("outcome must be finite");
  IndependentGaussianBelief out = belief;
  const auto i = static_cast<Eigen::Index>(x);
  const double beta = belief.precisions[i];
  const double beta_w = belief.noise_precisions[i];
  if (std::isinf(beta_w)) {
    out.means[i] = w;
    out.precisions[i] = kInf;
  } else if (std::isinf(beta)) {
    // value already known exactly; a noisy observation cannot move it
  } else {
    out.means[i] = (beta * belief.means[i] + beta_w * w) / (beta + beta_w);
    out.precisions[i] = beta + beta_w;
  }
  return out;
}

CorrelatedGaussianBelief update_correlated(const CorrelatedGaussianBelief& belief, std::size_t x, double w) {
  check_alternative(x, belief.size());
  if (!std::isfinite(w)) throw InputError("outcome must be finite");
  const auto i = static_cast<Eigen::Index>(x);
  const double denom = belief.noise_variance + belief.covariance(i, i);
  if (!(denom > 0)) throw NumericalError("degenerate update: noise variance + Sigma_xx <= 0");

  const VectorXd column = belief.covariance.col(i);
  CorrelatedGaussianBelief out = belief;
  out.mean = belief.mean + ((w - belief.mean[i]) / denom) * column;
  out.covariance = symmetrized(belief.covariance - (column * column.transpose()) / denom);

  const double tol = psd_tolerance(belief.covariance);
  if ((out.covariance.diagonal().array() < -tol).any()) {
    throw NumericalError("covariance lost positive semidefiniteness after update");
  }
  if (out.covariance.rows() <= kFullPsdCheckLimit) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(out.covariance, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
      throw NumericalError("covariance lost positive semidefiniteness after update");
    }
  }
  return out;
}

LinearGaussianBelief update_linear(const LinearGaussianBelief& belief, const VectorXd& controls, double y) {
  if (!std::isfinite(y)) throw InputError("outcome must be finite");
  const VectorXd phi = belief.feature_map(controls);
  const VectorXd b_phi = belief.scaled_covariance * phi;
  const double gamma = 1.0 + phi.dot(b_phi);
  if (!(gamma > 0) || !std::isfinite(gamma)) throw NumericalError("degenerate update: gamma <= 0");
  const double innovation = y - phi.dot(belief.coefficient_mean);

  LinearGaussianBelief out = belief;
  out.coefficient_mean = belief.coefficient_mean + (innovation / gamma) * b_phi;
  out.scaled_covariance = symmetrized(belief.scaled_covariance - (b_phi * b_phi.transpose()) / gamma);
  return out;
}

SampledBelief update_sampled(const SampledBelief& belief, const VectorXd& state, const VectorXd& controls, double y) {
  if (!std::isfinite(y)) throw InputError("outcome must be finite");
  if (belief.model.binary() && y != 0.0 && y != 1.0) throw InputError("binary response model expects outcome 0 or 1");
  const auto k_count = static_cast<Eigen::Index>(belief.candidates.size());
  VectorXd weighted(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double m = belief.model.mean(state, controls, belief.candidates[static_cast<std::size_t>(k)]);
    weighted[k] = belief.model.likelihood(y, m) * belief.probabilities[k];
  }
  const double evidence = weighted.sum();
  if (!(evidence > 0) || !std::isfinite(evidence)) {
    throw InferenceError("observation has zero likelihood under every candidate");
  }
  SampledBelief out = belief;
  out.probabilities = weighted / evidence;
  return out;
}

BeliefState update(const BeliefState& belief, std::size_t x, double outcome) {
  return std::visit(
      Overloaded{
          [&](const IndependentGaussianBelief& b) -> BeliefState { return update_independent(b, x, outcome); },
          [&](const CorrelatedGaussianBelief& b) -> BeliefState { return update_correlated(b, x, outcome); },
          [&](const LinearGaussianBelief& b) -> BeliefState {
            check_alternative(x, b.size());
            return update_linear(b, b.designs[x], outcome);
          },
          [&](const SampledBelief& b) -> BeliefState {
            check_alternative(x, b.size());
            return update_sampled(b, b.state, b.designs[x], outcome);
          },
      },
      belief);
}

// --- priors ---------------------------------------------------------------

MatrixXd exponential_covariance_prior(const std::vector<VectorXd>& points, const VectorXd& sigmas, double beta) {
  if (!(beta >= 0) || !std::isfinite(beta)) throw InputError("decay rate beta must be finite and >= 0", "beta");
  if (sigmas.size() != static_cast<Eigen::Index>(points.size())) throw InputError("one sigma per point required", "sigmas");
  for (Eigen::Index i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0) || !std::isfinite(sigmas[i])) throw InputError("sigmas must be positive", at("sigmas", static_cast<std::size_t>(i)));
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  MatrixXd cov(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    cov(r, r) = sigmas[r] * sigmas[r];
    for (Eigen::Index c = r + 1; c < n; ++c) {
      const auto& a = points[static_cast<std::size_t>(r)];
      const auto& b = points[static_cast<std::size_t>(c)];
      if (a.size() != b.size()) throw InputError("points must share a dimension", at("points", static_cast<std::size_t>(c)));
      const double v = sigmas[r] * sigmas[c] * std::exp(-beta * (a - b).norm());
      cov(r, c) = v;
      cov(c, r) = v;
    }
  }
  return cov;
}

NormalPrior prior_from_interval(double lo, double hi, double confidence) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError("interval endpoints must be finite");
  if (!(hi > lo)) throw InputError("interval needs hi > lo");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InputError("confidence must lie in (0, 1)");
  const double z = normal_quantile(0.5 * (1.0 + confidence));
  return {0.5 * (lo + hi), (hi - lo) / (2.0 * z)};
}

// --- queries --------------------------------------------------------------

std::size_t size(const BeliefState& belief) {
  return std::visit([](const auto& b) { return b.size(); }, belief);
}

const std::vector<std::string>& alternatives(const BeliefState& belief) {
  return std::visit([](const auto& b) -> const std::vector<std::string>& { return b.alternatives; }, belief);
}

std::string_view kind_name(const BeliefState& belief) {
  return std::visit(Overloaded{
                        [](const IndependentGaussianBelief&) { return std::string_view("independent_gaussian"); },
                        [](const CorrelatedGaussianBelief&) { return std::string_view("correlated_gaussian"); },
                        [](const LinearGaussianBelief&) { return std::string_view("linear_gaussian"); },
                        [](const SampledBelief&) { return std::string_view("sampled"); },
                    },
                    belief);
}

void validate(const BeliefState& belief) {
  std::visit([](const auto& b) { b.validate(); }, belief);
}

std::size_t alternative_index(const BeliefState& belief, std::string_view name) {
  const auto& names = alternatives(belief);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("unknown alternative '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

Predictive predictive_params(const LinearGaussianBelief& belief, const VectorXd& controls) {
  const VectorXd phi = belief.feature_map(controls);
  const double spread = phi.dot(belief.scaled_covariance * phi) * belief.noise_variance;
  return {phi.dot(belief.coefficient_mean), spread + belief.noise_variance};
}

Predictive predictive_params(const BeliefState& belief, std::size_t x) {
  check_alternative(x, size(belief));
  const auto i = static_cast<Eigen::Index>(x);
  return std::visit(
      Overloaded{
          [&](const IndependentGaussianBelief& b) {
            const double prior_var = std::isinf(b.precisions[i]) ? 0.0 : 1.0 / b.precisions[i];
            const double noise_var = std::isinf(b.noise_precisions[i]) ? 0.0 : 1.0 / b.noise_precisions[i];
            return Predictive{b.means[i], prior_var + noise_var};
          },
          [&](const CorrelatedGaussianBelief& b) {
            return Predictive{b.mean[i], b.covariance(i, i) + b.noise_variance};
          },
          [&](const LinearGaussianBelief& b) { return predictive_params(b, b.designs[x]); },
          [&](const SampledBelief& b) {
            const VectorXd m = b.candidate_means(x);
            const double mean = b.probabilities.dot(m);
            const double spread = b.probabilities.dot((m.array() - mean).square().matrix());
            const double noise = b.model.binary() ? b.probabilities.dot((m.array() * (1.0 - m.array())).matrix())
                                                  : b.model.noise_variance;
            return Predictive{mean, spread + noise};
          },
      },
      belief);
}

VectorXd point_estimates(const BeliefState& belief) {
  return std::visit(Overloaded{
                        [](const IndependentGaussianBelief& b) -> VectorXd { return b.means; },
                        [](const CorrelatedGaussianBelief& b) -> VectorXd { return b.mean; },
                        [](const LinearGaussianBelief& b) -> VectorXd {
                          VectorXd out(static_cast<Eigen::Index>(b.size()));
                          for (std::size_t x = 0; x < b.size(); ++x) out[static_cast<Eigen::Index>(x)] = b.predict(b.designs[x]);
                          return out;
                        },
                        [](const SampledBelief& b) -> VectorXd {
                          VectorXd out(static_cast<Eigen::Index>(b.size()));
                          for (std::size_t x = 0; x < b.size(); ++x) {
                            out[static_cast<Eigen::Index>(x)] = b.probabilities.dot(b.candidate_means(x));
                          }
                          return out;
                        },
                    },
                    belief);
}

VectorXd posterior_stddevs(const BeliefState& belief) {
  return std::visit(
      Overloaded{
          [](const IndependentGaussianBelief& b) -> VectorXd {
            VectorXd out(b.precisions.size());
            for (Eigen::Index i = 0; i < out.size(); ++i) {
              out[i] = std::isinf(b.precisions[i]) ? 0.0 : 1.0 / std::sqrt(b.precisions[i]);
            }
            return out;
          },
          [](const CorrelatedGaussianBelief& b) -> VectorXd {
            return b.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
          },
          [](const LinearGaussianBelief& b) -> VectorXd {
            VectorXd out(static_cast<Eigen::Index>(b.size()));
            for (std::size_t x = 0; x < b.size(); ++x) {
              const VectorXd phi = b.feature_map(b.designs[x]);
              out[static_cast<Eigen::Index>(x)] = std::sqrt(std::max(0.0, phi.dot(b.scaled_covariance * phi) * b.noise_variance));
            }
            return out;
          },
          [](const SampledBelief&) -> VectorXd {
            throw UnsupportedBeliefError("sampled beliefs carry no per-alternative posterior std");
          },
      },
      belief);
}

VectorXd truth_stddevs(const BeliefState& belief) {
  if (const auto* s = std::get_if<SampledBelief>(&belief)) {
    VectorXd out(static_cast<Eigen::Index>(s->size()));
    for (std::size_t x = 0; x < s->size(); ++x) {
      const VectorXd m = s->candidate_means(x);
      const double mean = s->probabilities.dot(m);
      out[static_cast<Eigen::Index>(x)] = std::sqrt(std::max(0.0, s->probabilities.dot((m.array() - mean).square().matrix())));
    }
    return out;
  }
  return posterior_stddevs(belief);
}

double truth_cdf(const BeliefState& belief, std::size_t x, double value, double tie_u) {
  check_alternative(x, size(belief));
  if (const auto* s = std::get_if<SampledBelief>(&belief)) {
    const VectorXd m = s->candidate_means(x);
    double below = 0.0;
    double tied = 0.0;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      if (m[k] < value) below += s->probabilities[k];
      else if (m[k] == value) tied += s->probabilities[k];
    }
    return below + tie_u * tied;
  }
  const double mean = point_estimates(belief)[static_cast<Eigen::Index>(x)];
  const double sd = posterior_stddevs(belief)[static_cast<Eigen::Index>(x)];
  if (sd > 0) return normal_cdf((value - mean) / sd);
  if (value < mean) return 0.0;
  if (value > mean) return 1.0;
  return tie_u;
}

std::optional<VectorXd> update_direction(const BeliefState& belief, std::size_t x) {
  check_alternative(x, size(belief));
  const auto i = static_cast<Eigen::Index>(x);
  return std::visit(
      Overloaded{
          [&](const IndependentGaussianBelief& b) -> std::optional<VectorXd> {
            VectorXd d = VectorXd::Zero(static_cast<Eigen::Index>(b.size()));
            d[i] = std::sqrt(independent_change_variance(b.precisions[i], b.noise_precisions[i]));
            return d;
          },
          [&](const CorrelatedGaussianBelief& b) -> std::optional<VectorXd> {
            const double denom = b.noise_variance + b.covariance(i, i);
            if (!(denom > 0)) throw NumericalError("degenerate update: noise variance + Sigma_xx <= 0");
            return VectorXd(b.covariance.col(i) / std::sqrt(denom));
          },
          [&](const LinearGaussianBelief& b) -> std::optional<VectorXd> {
            const VectorXd phi = b.feature_map(b.designs[x]);
            const VectorXd b_phi = b.scaled_covariance * phi;
            const double gamma = 1.0 + phi.dot(b_phi);
            if (!(gamma > 0)) throw NumericalError("degenerate update: gamma <= 0");
            const double scale = std::sqrt(b.noise_variance) / std::sqrt(gamma);
            VectorXd d(static_cast<Eigen::Index>(b.size()));
            for (std::size_t y = 0; y < b.size(); ++y) {
              d[static_cast<Eigen::Index>(y)] = b.feature_map(b.designs[y]).dot(b_phi) * scale;
            }
            return d;
          },
          [](const SampledBelief&) -> std::optional<VectorXd> { return std::nullopt; },
      },
      belief);
}

MatrixXd psd_factor(const MatrixXd& covariance) {
  if (covariance.size() == 0) return covariance;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrized(covariance));
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const VectorXd& values = solver.eigenvalues();
  if (values.minCoeff() < -psd_tolerance(covariance)) throw NumericalError("covariance is not positive semidefinite");
  return solver.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// --- TruthSampler ---------------------------------------------------------

TruthSampler::TruthSampler(BeliefState belief) : belief_(std::move(belief)) {
  validate(belief_);
  if (const auto* c = std::get_if<CorrelatedGaussianBelief>(&belief_)) {
    factor_ = psd_factor(c->covariance);
  } else if (const auto* l = std::get_if<LinearGaussianBelief>(&belief_)) {
    factor_ = psd_factor(l->scaled_covariance * l->noise_variance);
  }
}

TruthDraw TruthSampler::draw(RandomStream& rng) const {
  return std::visit(
      Overloaded{
          [&](const IndependentGaussianBelief& b) {
            TruthDraw t;
            t.mu.resize(b.means.size());
            for (Eigen::Index i = 0; i < b.means.size(); ++i) {
              const double z = rng.standard_normal();
              t.mu[i] = std::isinf(b.precisions[i]) ? b.means[i] : b.means[i] + z / std::sqrt(b.precisions[i]);
            }
            return t;
          },
          [&](const CorrelatedGaussianBelief& b) {
            VectorXd z(b.mean.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.standard_normal();
            TruthDraw t;
            t.mu = b.mean + factor_ * z;
            return t;
          },
          [&](const LinearGaussianBelief& b) {
            VectorXd z(b.coefficient_mean.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.standard_normal();
            TruthDraw t;
            t.theta = b.coefficient_mean + factor_ * z;
            t.mu.resize(static_cast<Eigen::Index>(b.size()));
            for (std::size_t x = 0; x < b.size(); ++x) {
              t.mu[static_cast<Eigen::Index>(x)] = b.feature_map(b.designs[x]).dot(t.theta);
            }
            return t;
          },
          [&](const SampledBelief& b) {
            const double u = rng.uniform();
            std::size_t k = 0;
            double cumulative = 0.0;
            for (; k + 1 < b.candidates.size(); ++k) {
              cumulative += b.probabilities[static_cast<Eigen::Index>(k)];
              if (u < cumulative) break;
            }
            // skip trailing zero-probability candidates when rounding left u past the mass
            while (k > 0 && b.probabilities[static_cast<Eigen::Index>(k)] == 0.0) --k;
            TruthDraw t;
            t.candidate = k;
            t.theta = b.candidates[k];
            t.mu.resize(static_cast<Eigen::Index>(b.size()));
            for (std::size_t x = 0; x < b.size(); ++x) {
              t.mu[static_cast<Eigen::Index>(x)] = b.model.mean(b.state, b.designs[x], t.theta);
            }
            return t;
          },
      },
      belief_);
}

// --- serialization --------------------------------------------------------

namespace {

using nlohmann::json;
namespace ju = json_util;

std::string_view feature_kind_name(FeatureMap::Kind k) {
  switch (k) {
    case FeatureMap::Kind::kIdentity: return "identity";
    case FeatureMap::Kind::kAffine: return "affine";
    case FeatureMap::Kind::kPolynomial: return "polynomial";
    case FeatureMap::Kind::kIndicator: return "indicator";
  }
  return "identity";
}

std::string_view response_kind_name(ResponseModel::Kind k) {
  switch (k) {
    case ResponseModel::Kind::kLogistic: return "logistic";
    case ResponseModel::Kind::kLinear: return "linear";
    case ResponseModel::Kind::kGaussianPeak: return "gaussian_peak";
  }
  return "logistic";
}

json designs_json(const std::vector<VectorXd>& designs) {
  json out = json::array();
  for (const auto& d : designs) out.push_back(ju::vector(d));
  return out;
}

std::vector<VectorXd> vectors_from_json(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of arrays", path);
  std::vector<VectorXd> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(ju::as_vector(v[i], ju::index(path, i)));
  return out;
}

std::vector<std::string> names_from(const json& doc, const std::vector<std::string>* fallback) {
  if (auto it = doc.find("alternatives"); it != doc.end()) return ju::as_string_list(*it, "alternatives");
  if (fallback != nullptr) return *fallback;
  throw ConfigError("alternatives: missing required field", "alternatives");
}

FeatureMap feature_map_from_json(const json& v) {
  FeatureMap fm;
  const std::string kind = ju::as_string(ju::require(v, "kind", "feature_map"), "feature_map.kind");
  if (kind == "identity") fm.kind = FeatureMap::Kind::kIdentity;
  else if (kind == "affine") fm.kind = FeatureMap::Kind::kAffine;
  else if (kind == "polynomial") fm.kind = FeatureMap::Kind::kPolynomial;
  else if (kind == "indicator") fm.kind = FeatureMap::Kind::kIndicator;
  else throw ConfigError("feature_map.kind: unknown feature map '" + kind + "'", "feature_map.kind");
  if (auto it = v.find("levels"); it != v.end()) {
    if (!it->is_array()) throw ConfigError("feature_map.levels: expected an array", "feature_map.levels");
    for (std::size_t j = 0; j < it->size(); ++j) {
      fm.levels.push_back(static_cast<int>(ju::as_integer((*it)[j], ju::index("feature_map.levels", j))));
    }
  }
  const std::int64_t default_dim = fm.kind == FeatureMap::Kind::kIndicator ? static_cast<std::int64_t>(fm.levels.size()) : 1;
  fm.input_dim = static_cast<int>(ju::integer_or(v, "input_dim", default_dim, "feature_map"));
  fm.degree = static_cast<int>(ju::integer_or(v, "degree", 1, "feature_map"));
  return fm;
}

}  // namespace

nlohmann::json to_json(const BeliefState& belief) {
  json doc;
  doc["version"] = kBeliefSchemaVersion;
  doc["kind"] = std::string(kind_name(belief));
  doc["alternatives"] = alternatives(belief);
  std::visit(Overloaded{
                 [&](const IndependentGaussianBelief& b) {
                   doc["means"] = ju::vector(b.means);
                   doc["precisions"] = ju::vector(b.precisions);
                   const bool shared = (b.noise_precisions.array() == b.noise_precisions[0]).all();
                   if (shared) doc["noise_precision"] = ju::number(b.noise_precisions[0]);
                   else doc["noise_precisions"] = ju::vector(b.noise_precisions);
                 },
                 [&](const CorrelatedGaussianBelief& b) {
                   doc["mean"] = ju::vector(b.mean);
                   doc["covariance"] = ju::matrix(b.covariance);
                   doc["noise_variance"] = ju::number(b.noise_variance);
                 },
                 [&](const LinearGaussianBelief& b) {
                   doc["designs"] = designs_json(b.designs);
                   doc["coefficient_mean"] = ju::vector(b.coefficient_mean);
                   doc["scaled_covariance"] = ju::matrix(b.scaled_covariance);
                   doc["noise_variance"] = ju::number(b.noise_variance);
                   json fm;
                   fm["kind"] = std::string(feature_kind_name(b.feature_map.kind));
                   fm["input_dim"] = b.feature_map.input_dim;
                   if (b.feature_map.kind == FeatureMap::Kind::kPolynomial) fm["degree"] = b.feature_map.degree;
                   if (b.feature_map.kind == FeatureMap::Kind::kIndicator) fm["levels"] = b.feature_map.levels;
                   doc["feature_map"] = fm;
                 },
                 [&](const SampledBelief& b) {
                   doc["designs"] = designs_json(b.designs);
                   doc["state"] = ju::vector(b.state);
                   doc["candidates"] = designs_json(b.candidates);
                   doc["probabilities"] = ju::vector(b.probabilities);
                   json rm;
                   rm["kind"] = std::string(response_kind_name(b.model.kind));
                   if (!b.model.binary()) rm["noise_variance"] = ju::number(b.model.noise_variance);
                   doc["response_model"] = rm;
                 },
             },
             belief);
  return doc;
}

BeliefState belief_from_json(const nlohmann::json& doc, const std::vector<std::string>* default_alternatives) {
  if (!doc.is_object()) throw ConfigError("belief document must be an object");
  if (auto it = doc.find("version"); it != doc.end() && ju::as_integer(*it, "version") != kBeliefSchemaVersion) {
    throw ConfigError("version: unsupported belief schema version", "version");
  }
  const std::string kind = ju::as_string(ju::require(doc, "kind", ""), "kind");
  const std::vector<std::string> names = names_from(doc, default_alternatives);

  BeliefState out;
  if (kind == "independent_gaussian") {
    IndependentGaussianBelief b;
    b.alternatives = names;
    b.means = ju::as_vector(ju::require(doc, "means", ""), "means");
    if (doc.contains("precisions")) {
      b.precisions = ju::as_vector(doc["precisions"], "precisions");
    } else if (doc.contains("stddevs")) {
      const VectorXd sd = ju::as_vector(doc["stddevs"], "stddevs");
      b.precisions = sd.unaryExpr([](double s) { return s == 0.0 ? kInf : 1.0 / (s * s); });
    } else {
      throw ConfigError("precisions: missing required field", "precisions");
    }
    if (doc.contains("noise_precisions")) {
      b.noise_precisions = ju::as_vector(doc["noise_precisions"], "noise_precisions");
    } else if (doc.contains("noise_precision")) {
      b.noise_precisions = VectorXd::Constant(static_cast<Eigen::Index>(names.size()),
                                              ju::as_number(doc["noise_precision"], "noise_precision"));
    } else if (doc.contains("noise_stddev")) {
      const double s = ju::as_number(doc["noise_stddev"], "noise_stddev");
      b.noise_precisions = VectorXd::Constant(static_cast<Eigen::Index>(names.size()), s == 0.0 ? kInf : 1.0 / (s * s));
    } else {
      throw ConfigError("noise_precision: missing required field", "noise_precision");
    }
    out = std::move(b);
  } else if (kind == "correlated_gaussian") {
    CorrelatedGaussianBelief b;
    b.alternatives = names;
    b.mean = ju::as_vector(ju::require(doc, "mean", ""), "mean");
    b.covariance = ju::as_matrix(ju::require(doc, "covariance", ""), "covariance");
    b.noise_variance = ju::as_number(ju::require(doc, "noise_variance", ""), "noise_variance");
    out = std::move(b);
  } else if (kind == "linear_gaussian") {
    LinearGaussianBelief b;
    b.alternatives = names;
    b.designs = vectors_from_json(ju::require(doc, "designs", ""), "designs");
    b.coefficient_mean = ju::as_vector(ju::require(doc, "coefficient_mean", ""), "coefficient_mean");
    b.scaled_covariance = ju::as_matrix(ju::require(doc, "scaled_covariance", ""), "scaled_covariance");
    b.noise_variance = ju::as_number(ju::require(doc, "noise_variance", ""), "noise_variance");
    b.feature_map = feature_map_from_json(ju::require(doc, "feature_map", ""));
    out = std::move(b);
  } else if (kind == "sampled") {
    SampledBelief b;
    b.alternatives = names;
    b.designs = vectors_from_json(ju::require(doc, "designs", ""), "designs");
    b.state = doc.contains("state") ? ju::as_vector(doc["state"], "state") : VectorXd();
    b.candidates = vectors_from_json(ju::require(doc, "candidates", ""), "candidates");
    if (doc.contains("probabilities")) {
      b.probabilities = ju::as_vector(doc["probabilities"], "probabilities");
    } else {
      const auto k = static_cast<Eigen::Index>(b.candidates.size());
      b.probabilities = VectorXd::Constant(k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k));
    }
    const json& rm = ju::require(doc, "response_model", "");
    const std::string rk = ju::as_string(ju::require(rm, "kind", "response_model"), "response_model.kind");
    if (rk == "logistic") b.model.kind = ResponseModel::Kind::kLogistic;
    else if (rk == "linear") b.model.kind = ResponseModel::Kind::kLinear;
    else if (rk == "gaussian_peak") b.model.kind = ResponseModel::Kind::kGaussianPeak;
    else throw ConfigError("response_model.kind: unknown response model '" + rk + "'", "response_model.kind");
    b.model.noise_variance = ju::number_or(rm, "noise_variance", 1.0, "response_model");
    out = std::move(b);
  } else {
    throw ConfigError("kind: unknown belief kind '" + kind + "'", "kind");
  }
  try {
    validate(out);
  } catch (const Error& e) {
    throw ConfigError(e.what(), e.field_path());
  }
  return out;
}

}  // namespace optilearn
