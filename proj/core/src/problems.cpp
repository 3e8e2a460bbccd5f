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

#include "optilearn/problems.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"

namespace optilearn {

namespace {

namespace ju = json_util;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const json& empty_object() {
  static const json obj = json::object();
  return obj;
}

// Scalar broadcast or explicit per-alternative array.
VectorXd vector_param(const json& params, const std::string& key, Eigen::Index n, double fallback,
                      const std::string& path) {
  auto it = params.find(key);
  const std::string p = ju::join(path, key);
  if (it == params.end()) return VectorXd::Constant(n, fallback);
  if (it->is_array()) {
    VectorXd v = ju::as_vector(*it, p);
    if (v.size() != n) throw ConfigError(p + ": expected " + std::to_string(n) + " values", p);
    return v;
  }
  return VectorXd::Constant(n, ju::as_number(*it, p));
}

void require_finite_positive(const VectorXd& v, const std::string& path, bool allow_zero) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const bool ok = std::isfinite(v[i]) && (allow_zero ? v[i] >= 0 : v[i] > 0);
    if (!ok) {
      const std::string p = ju::index(path, static_cast<std::size_t>(i));
      throw ConfigError(p + (allow_zero ? ": must be finite and >= 0" : ": must be finite and > 0"), p);
    }
  }
}

double positive_param(const json& params, const std::string& key, double fallback, const std::string& path,
                      bool allow_zero = false) {
  const double v = ju::number_or(params, key, fallback, path);
  const std::string p = ju::join(path, key);
  if (!std::isfinite(v) || (allow_zero ? v < 0 : v <= 0)) {
    throw ConfigError(p + (allow_zero ? ": must be finite and >= 0" : ": must be finite and > 0"), p);
  }
  return v;
}

void reject_unknown(const json& params, std::initializer_list<std::string_view> known, const std::string& path) {
  for (const auto& [key, value] : params.items()) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) {
      const std::string p = ju::join(path, key);
      throw ConfigError(p + ": unknown parameter '" + key + "'", p);
    }
  }
}

double precision_from_std(double sd) { return sd == 0.0 ? kInf : 1.0 / (sd * sd); }

std::vector<std::string> names_param(const json& params, std::size_t fallback_count, const std::string& prefix,
                                     const std::string& path) {
  auto it = params.find("alternatives");
  const std::string p = ju::join(path, "alternatives");
  std::size_t count = fallback_count;
  if (it != params.end()) {
    if (it->is_array()) return ju::as_string_list(*it, p);
    const auto n = ju::as_integer(*it, p);
    if (n < 1) throw ConfigError(p + ": need at least one alternative", p);
    count = static_cast<std::size_t>(n);
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

Problem independent_gaussian(const json& params, const std::string& path) {
  reject_unknown(params, {"alternatives", "prior_means", "prior_stddevs", "prior_intervals", "confidence", "noise_stddev", "noise_stddevs"}, path);
  std::size_t fallback = 5;
  if (auto it = params.find("prior_means"); it != params.end() && it->is_array() && !it->empty()) fallback = it->size();
  const auto names = names_param(params, fallback, "x", path);
  const auto n = static_cast<Eigen::Index>(names.size());
  VectorXd means = vector_param(params, "prior_means", n, 0.0, path);
  VectorXd sds = vector_param(params, "prior_stddevs", n, 1.0, path);
  if (auto it = params.find("prior_intervals"); it != params.end()) {
    const std::string p = ju::join(path, "prior_intervals");
    const MatrixXd intervals = ju::as_matrix(*it, p);
    if (intervals.rows() != n || intervals.cols() != 2) throw ConfigError(p + ": expected one [lo, hi] pair per alternative", p);
    const double confidence = ju::number_or(params, "confidence", 0.95, path);
    for (Eigen::Index i = 0; i < n; ++i) {
      try {
        const NormalPrior prior = prior_from_interval(intervals(i, 0), intervals(i, 1), confidence);
        means[i] = prior.mean;
        sds[i] = prior.stddev;
      } catch (const InputError& e) {
        const std::string ip = ju::index(p, static_cast<std::size_t>(i));
        throw ConfigError(ip + ": " + e.what(), ip);
      }
    }
  }
  require_finite_positive(sds, ju::join(path, "prior_stddevs"), true);
  VectorXd noise;
  if (params.contains("noise_stddevs")) noise = vector_param(params, "noise_stddevs", n, 1.0, path);
  else noise = VectorXd::Constant(n, positive_param(params, "noise_stddev", 1.0, path, true));
  require_finite_positive(noise, ju::join(path, "noise_stddevs"), true);

  IndependentGaussianBelief b;
  b.alternatives = names;
  b.means = means;
  b.precisions = sds.unaryExpr(&precision_from_std);
  b.noise_precisions = noise.unaryExpr(&precision_from_std);
  return Problem("independent-gaussian", b);
}

Problem correlated_catalysts(const json& params, const std::string& path) {
  reject_unknown(params, {"alternatives", "prior_means", "prior_stddevs", "noise_stddev", "correlation"}, path);
  static const std::vector<std::string> kNames = {"Fe", "Fe-Co", "Fe-Mn", "Ni", "Ni-Cu", "Ni-Zn", "Fe-Ni"};
  std::vector<std::string> names = kNames;
  if (params.contains("alternatives")) {
    names = ju::as_string_list(params["alternatives"], ju::join(path, "alternatives"));
  }
  const auto n = static_cast<Eigen::Index>(names.size());
  MatrixXd corr = n == 7 ? catalyst_correlation() : MatrixXd::Identity(n, n);
  if (params.contains("correlation")) corr = ju::as_matrix(params["correlation"], ju::join(path, "correlation"));
  if (corr.rows() != n || corr.cols() != n) {
    const std::string p = ju::join(path, "correlation");
    throw ConfigError(p + ": expected an M x M correlation matrix", p);
  }
  const VectorXd sds = vector_param(params, "prior_stddevs", n, 1.0, path);
  require_finite_positive(sds, ju::join(path, "prior_stddevs"), true);
  CorrelatedGaussianBelief b;
  b.alternatives = names;
  b.mean = vector_param(params, "prior_means", n, 0.0, path);
  b.covariance = sds.asDiagonal() * corr * sds.asDiagonal();
  const double noise = positive_param(params, "noise_stddev", 1.0, path);
  b.noise_variance = noise * noise;
  try {
    b.validate();
  } catch (const InputError& e) {
    const std::string p = ju::join(path, e.field_path() == "covariance" ? "correlation" : e.field_path());
    throw ConfigError(p + ": " + e.what(), p);
  }
  return Problem("correlated-catalysts", b);
}

Problem grid_2d(const json& params, const std::string& path) {
  reject_unknown(params, {"grid_size", "lower", "upper", "beta", "prior_mean", "prior_stddev", "noise_stddev"}, path);
  const auto g = ju::integer_or(params, "grid_size", 21, path);
  if (g < 1 || g > 60) throw ConfigError(ju::join(path, "grid_size") + ": must lie in [1, 60]", ju::join(path, "grid_size"));
  const VectorXd lower = params.contains("lower") ? ju::as_vector(params["lower"], ju::join(path, "lower")) : VectorXd::Zero(2);
  const VectorXd upper = params.contains("upper") ? ju::as_vector(params["upper"], ju::join(path, "upper")) : VectorXd::Ones(2);
  if (lower.size() != 2 || upper.size() != 2 || !(upper.array() > lower.array()).all()) {
    throw ConfigError(ju::join(path, "upper") + ": bounds must be 2-vectors with upper > lower", ju::join(path, "upper"));
  }
  const double beta = ju::number_or(params, "beta", 1.0, path);
  if (!(beta >= 0) || !std::isfinite(beta)) throw ConfigError(ju::join(path, "beta") + ": must be finite and >= 0", ju::join(path, "beta"));
  const double sd = positive_param(params, "prior_stddev", 1.0, path);
  const double noise = positive_param(params, "noise_stddev", 0.5, path);

  std::vector<VectorXd> points;
  std::vector<std::string> names;
  for (std::int64_t i = 0; i < g; ++i) {
    for (std::int64_t j = 0; j < g; ++j) {
      const double u = g == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(g - 1);
      const double v = g == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(g - 1);
      VectorXd p(2);
      p << lower[0] + u * (upper[0] - lower[0]), lower[1] + v * (upper[1] - lower[1]);
      points.push_back(p);
      names.push_back("g" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  CorrelatedGaussianBelief b;
  b.alternatives = names;
  b.mean = VectorXd::Constant(n, ju::number_or(params, "prior_mean", 0.0, path));
  b.covariance = exponential_covariance_prior(points, VectorXd::Constant(n, sd), beta);
  b.noise_variance = noise * noise;
  return Problem("grid-2d-exponential", b, points);
}

Problem logistic_binary(const json& params, const std::string& path) {
  reject_unknown(params, {"state", "controls", "candidates", "theta_grid", "probabilities"}, path);
  SampledBelief b;
  b.model.kind = ResponseModel::Kind::kLogistic;
  b.state = params.contains("state") ? ju::as_vector(params["state"], ju::join(path, "state")) : VectorXd::Ones(1);
  std::vector<VectorXd> coords;
  if (params.contains("controls")) {
    const std::string p = ju::join(path, "controls");
    const json& c = params["controls"];
    if (!c.is_array() || c.empty()) throw ConfigError(p + ": expected a nonempty array", p);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i].is_array()) coords.push_back(ju::as_vector(c[i], ju::index(p, i)));
      else coords.push_back(VectorXd::Constant(1, ju::as_number(c[i], ju::index(p, i))));
    }
  } else {
    for (int i = 0; i < 9; ++i) coords.push_back(VectorXd::Constant(1, -2.0 + 0.5 * i));
  }
  b.designs = coords;
  for (std::size_t i = 0; i < coords.size(); ++i) b.alternatives.push_back("x" + std::to_string(i + 1));

  if (params.contains("candidates")) {
    const std::string p = ju::join(path, "candidates");
    const json& c = params["candidates"];
    if (!c.is_array()) throw ConfigError(p + ": expected an array of parameter vectors", p);
    for (std::size_t k = 0; k < c.size(); ++k) b.candidates.push_back(ju::as_vector(c[k], ju::index(p, k)));
  } else {
    std::vector<std::vector<double>> axes = {{-1.0, 0.0, 1.0}, {-2.0, -1.0, 1.0, 2.0}};
    if (params.contains("theta_grid")) {
      const std::string p = ju::join(path, "theta_grid");
      axes.clear();
      const json& t = params["theta_grid"];
      if (!t.is_array()) throw ConfigError(p + ": expected one value list per parameter", p);
      for (std::size_t d = 0; d < t.size(); ++d) {
        const VectorXd v = ju::as_vector(t[d], ju::index(p, d));
        axes.emplace_back(v.data(), v.data() + v.size());
      }
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    bool done = axes.empty() || std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.empty(); });
    while (!done) {
      VectorXd theta(static_cast<Eigen::Index>(axes.size()));
      for (std::size_t d = 0; d < axes.size(); ++d) theta[static_cast<Eigen::Index>(d)] = axes[d][idx[d]];
      b.candidates.push_back(theta);
      std::size_t d = axes.size();
      while (d-- > 0) {
        if (++idx[d] < axes[d].size()) break;
        idx[d] = 0;
        if (d == 0) done = true;
      }
    }
  }
  const auto k = static_cast<Eigen::Index>(b.candidates.size());
  b.probabilities = params.contains("probabilities")
                        ? ju::as_vector(params["probabilities"], ju::join(path, "probabilities"))
                        : VectorXd::Constant(k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k));
  try {
    b.validate();
  } catch (const InputError& e) {
    const std::string p = ju::join(path, e.field_path());
    throw ConfigError(p + ": " + e.what(), p);
  }
  const bool scalar = std::all_of(coords.begin(), coords.end(), [](const VectorXd& c) { return c.size() <= 2; });
  return Problem("logistic-binary", b, scalar ? coords : std::vector<VectorXd>{});
}

Problem linear_qsar(const json& params, const std::string& path) {
  reject_unknown(params, {"sites", "noise_stddev", "intercept_mean", "intercept_stddev", "substituent_stddev",
                          "coefficient_mean", "coefficient_stddevs"}, path);
  std::vector<int> levels = {3, 3, 3};
  if (params.contains("sites")) {
    const std::string p = ju::join(path, "sites");
    const json& s = params["sites"];
    if (!s.is_array() || s.empty()) throw ConfigError(p + ": expected a nonempty list of substituent counts", p);
    levels.clear();
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto l = ju::as_integer(s[j], ju::index(p, j));
      if (l < 1) throw ConfigError(ju::index(p, j) + ": must be >= 1", ju::index(p, j));
      levels.push_back(static_cast<int>(l));
    }
  }
  std::size_t combos = 1;
  for (int l : levels) combos *= static_cast<std::size_t>(l);
  if (combos > 4096) throw ConfigError(ju::join(path, "sites") + ": too many compounds (limit 4096)", ju::join(path, "sites"));

  LinearGaussianBelief b;
  b.feature_map.kind = FeatureMap::Kind::kIndicator;
  b.feature_map.input_dim = static_cast<int>(levels.size());
  b.feature_map.levels = levels;
  const auto f = static_cast<Eigen::Index>(b.feature_map.feature_count());

  std::vector<int> digits(levels.size(), 0);
  for (std::size_t c = 0; c < combos; ++c) {
    VectorXd x(static_cast<Eigen::Index>(levels.size()));
    std::string name;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      x[static_cast<Eigen::Index>(j)] = digits[j];
      name += (j == 0 ? "" : "-") + std::to_string(digits[j]);
    }
    b.designs.push_back(x);
    b.alternatives.push_back("c" + name);
    for (std::size_t j = levels.size(); j-- > 0;) {
      if (++digits[j] < levels[j]) break;
      digits[j] = 0;
    }
  }

  const double noise = positive_param(params, "noise_stddev", 0.5, path);
  b.noise_variance = noise * noise;
  VectorXd mean = VectorXd::Zero(f);
  mean[0] = ju::number_or(params, "intercept_mean", 0.0, path);
  if (params.contains("coefficient_mean")) mean = vector_param(params, "coefficient_mean", f, 0.0, path);
  VectorXd sds = VectorXd::Constant(f, positive_param(params, "substituent_stddev", 0.5, path, true));
  sds[0] = positive_param(params, "intercept_stddev", 1.0, path, true);
  if (params.contains("coefficient_stddevs")) sds = vector_param(params, "coefficient_stddevs", f, 0.5, path);
  require_finite_positive(sds, ju::join(path, "coefficient_stddevs"), true);
  b.coefficient_mean = mean;
  b.scaled_covariance = (sds.array().square() / b.noise_variance).matrix().asDiagonal();
  return Problem("linear-qsar", b);
}

}  // namespace

MatrixXd catalyst_correlation() {
  MatrixXd r = MatrixXd::Constant(7, 7, 0.2);
  r.block(0, 0, 3, 3).setConstant(0.8);
  r.block(3, 3, 3, 3).setConstant(0.8);
  r.row(6).setConstant(0.5);
  r.col(6).setConstant(0.5);
  r.diagonal().setOnes();
  return r;
}

Problem::Problem(std::string family, BeliefState prior, std::vector<VectorXd> coordinates)
    : family_(std::move(family)), sampler_(std::move(prior)), coordinates_(std::move(coordinates)) {
  const BeliefState& b = sampler_.belief();
  if (!coordinates_.empty() && coordinates_.size() != optilearn::size(b)) {
    throw ConfigError("one coordinate vector per alternative required", "coordinates");
  }
  const auto m = static_cast<Eigen::Index>(optilearn::size(b));
  if (const auto* ind = std::get_if<IndependentGaussianBelief>(&b)) {
    noise_stddevs_ = ind->noise_precisions.unaryExpr([](double p) { return std::isinf(p) ? 0.0 : 1.0 / std::sqrt(p); });
  } else if (const auto* c = std::get_if<CorrelatedGaussianBelief>(&b)) {
    noise_stddevs_ = VectorXd::Constant(m, std::sqrt(c->noise_variance));
  } else if (const auto* l = std::get_if<LinearGaussianBelief>(&b)) {
    noise_stddevs_ = VectorXd::Constant(m, std::sqrt(l->noise_variance));
  } else if (const auto* s = std::get_if<SampledBelief>(&b); s != nullptr && !s->model.binary()) {
    noise_stddevs_ = VectorXd::Constant(m, std::sqrt(s->model.noise_variance));
  }
}

bool Problem::binary() const {
  const auto* s = std::get_if<SampledBelief>(&prior());
  return s != nullptr && s->model.binary();
}

double Problem::noise_draw(RandomStream& rng) const { return binary() ? rng.uniform() : rng.standard_normal(); }

double Problem::outcome_from_draw(const TruthDraw& truth, std::size_t x, double draw) const {
  if (x >= size()) throw DomainError("unknown alternative index " + std::to_string(x));
  const auto i = static_cast<Eigen::Index>(x);
  if (binary()) return draw < truth.mu[i] ? 1.0 : 0.0;
  const double sd = noise_stddevs_[i];
  return sd == 0.0 ? truth.mu[i] : truth.mu[i] + sd * draw;
}

Observation Problem::observe(const TruthDraw& truth, std::size_t x, RandomStream& rng) const {
  Observation obs;
  obs.outcome = outcome_from_draw(truth, x, noise_draw(rng));
  obs.alternative = alternatives()[x];
  return obs;
}

Problem build_problem(const nlohmann::json& doc, const std::string& path) {
  const std::string family = ju::as_string(ju::require(doc, "family", path), ju::join(path, "family"));
  const std::string params_path = ju::join(path, "params");
  const json& params = doc.contains("params") ? doc["params"] : empty_object();
  if (!params.is_object()) throw ConfigError(params_path + ": expected an object", params_path);
  try {
    if (family == "independent-gaussian") return independent_gaussian(params, params_path);
    if (family == "correlated-catalysts") return correlated_catalysts(params, params_path);
    if (family == "grid-2d-exponential") return grid_2d(params, params_path);
    if (family == "logistic-binary") return logistic_binary(params, params_path);
    if (family == "linear-qsar") return linear_qsar(params, params_path);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const std::string p = e.field_path().empty() ? params_path : ju::join(params_path, e.field_path());
    throw ConfigError(p + ": " + e.what(), p);
  }
  const std::string fp = ju::join(path, "family");
  throw ConfigError(fp + ": unknown problem family '" + family + "'", fp);
}

Problem problem_from_belief(const BeliefState& belief, std::vector<VectorXd> coordinates) {
  return Problem("posterior", belief, std::move(coordinates));
}

TruthDraw sample_truth(const Problem& problem, RandomStream& rng) { return problem.sample_truth(rng); }

Observation observe(const Problem& problem, const TruthDraw& truth, std::size_t x, RandomStream& rng) {
  return problem.observe(truth, x, rng);
}

}  // namespace optilearn
