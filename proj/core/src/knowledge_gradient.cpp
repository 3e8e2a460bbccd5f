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

#include "optilearn/knowledge_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optilearn/errors.hpp"
#include "optilearn/normal.hpp"

namespace optilearn {

namespace {

struct Draws {
  std::vector<double> primary;    // Z for Gaussian beliefs, candidate selector u for sampled
  std::vector<double> secondary;  // sampled beliefs: outcome noise (uniform or normal)
};

Draws make_draws(const BeliefState& belief, std::size_t samples, RandomStream& rng) {
  Draws d;
  d.primary.resize(samples);
  if (const auto* s = std::get_if<SampledBelief>(&belief)) {
    d.secondary.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      d.primary[i] = rng.uniform();
      d.secondary[i] = s->model.binary() ? rng.uniform() : rng.standard_normal();
    }
  } else {
    for (auto& z : d.primary) z = rng.standard_normal();
  }
  return d;
}

KgScore summarize(std::size_t x, const std::vector<double>& gains) {
  KgScore score;
  score.alternative = x;
  score.samples = gains.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) mean += (gains[i] - mean) / static_cast<double>(i + 1);
  double ss = 0.0;
  for (double g : gains) ss += (g - mean) * (g - mean);
  score.nu = mean;
  if (gains.size() > 1) {
    score.standard_error = std::sqrt(ss / static_cast<double>(gains.size() - 1) / static_cast<double>(gains.size()));
  }
  return score;
}

KgScore mc_gaussian(const VectorXd& theta, const VectorXd& direction, std::size_t x, const Draws& draws) {
  const double current = theta.maxCoeff();
  std::vector<double> gains(draws.primary.size());
  if (direction.isZero(0.0)) return summarize(x, std::vector<double>(draws.primary.size(), 0.0));
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const double z = draws.primary[i];
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index y = 0; y < theta.size(); ++y) best = std::max(best, theta[y] + direction[y] * z);
    gains[i] = best - current;
  }
  return summarize(x, gains);
}

// max_y of the posterior mixture mean after observing `outcome` at x.
double posterior_best(const SampledBelief& b, const MatrixXd& means, const VectorXd& at_x, double outcome) {
  const auto k_count = static_cast<Eigen::Index>(b.candidates.size());
  VectorXd w(k_count);
  if (b.model.binary()) {
    for (Eigen::Index k = 0; k < k_count; ++k) w[k] = b.probabilities[k] * (outcome == 1.0 ? at_x[k] : 1.0 - at_x[k]);
  } else {
    VectorXd log_l(k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double r = outcome - at_x[k];
      log_l[k] = b.probabilities[k] > 0 ? -0.5 * r * r / b.model.noise_variance : -std::numeric_limits<double>::infinity();
    }
    const double top = log_l.maxCoeff();
    for (Eigen::Index k = 0; k < k_count; ++k) w[k] = b.probabilities[k] * std::exp(log_l[k] - top);
  }
  const double total = w.sum();
  if (!(total > 0)) return (b.probabilities.transpose() * means).maxCoeff();
  return ((w / total).transpose() * means).maxCoeff();
}

KgScore mc_sampled(const SampledBelief& b, std::size_t x, const Draws& draws) {
  const auto k_count = static_cast<Eigen::Index>(b.candidates.size());
  const auto m_count = static_cast<Eigen::Index>(b.size());
  MatrixXd means(k_count, m_count);
  for (Eigen::Index y = 0; y < m_count; ++y) means.col(y) = b.candidate_means(static_cast<std::size_t>(y));
  const VectorXd at_x = means.col(static_cast<Eigen::Index>(x));
  const double current = (b.probabilities.transpose() * means).maxCoeff();

  std::vector<double> cumulative(static_cast<std::size_t>(k_count));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < k_count; ++k) cumulative[static_cast<std::size_t>(k)] = (acc += b.probabilities[k]);

  std::optional<double> binary_value[2];
  std::vector<double> gains(draws.primary.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), draws.primary[i]);
    auto k = static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - cumulative.begin(), k_count - 1));
    while (k > 0 && b.probabilities[k] == 0.0) --k;
    double best = 0.0;
    if (b.model.binary()) {
      const int y = draws.secondary[i] < at_x[k] ? 1 : 0;
      if (!binary_value[y]) binary_value[y] = posterior_best(b, means, at_x, static_cast<double>(y));
      best = *binary_value[y];
    } else {
      best = posterior_best(b, means, at_x, at_x[k] + std::sqrt(b.model.noise_variance) * draws.secondary[i]);
    }
    gains[i] = best - current;
  }
  return summarize(x, gains);
}

KgScore mc_with_draws(const BeliefState& belief, std::size_t x, const Draws& draws) {
  if (const auto* s = std::get_if<SampledBelief>(&belief)) return mc_sampled(*s, x, draws);
  const auto direction = update_direction(belief, x);
  return mc_gaussian(point_estimates(belief), *direction, x, draws);
}

}  // namespace

double f_zeta(double zeta) {
  if (zeta == -std::numeric_limits<double>::infinity()) return 0.0;
  return zeta * normal_cdf(zeta) + normal_pdf(zeta);
}

KgScore kg_repeated(const IndependentGaussianBelief& belief, std::size_t x, double k) {
  if (!(k >= 1.0) || !std::isfinite(k)) throw InputError("repetition factor k must be >= 1");
  if (x >= belief.size()) throw DomainError("unknown alternative index " + std::to_string(x));
  if (belief.size() < 2) throw DomainError("knowledge gradient needs at least two alternatives");
  const auto i = static_cast<Eigen::Index>(x);
  const double beta = belief.precisions[i];
  const double beta_w = k * belief.noise_precisions[i];

  double variance = 0.0;
  if (std::isinf(beta)) variance = 0.0;
  else if (std::isinf(beta_w)) variance = 1.0 / beta;
  else variance = 1.0 / beta - 1.0 / (beta + beta_w);
  const double sigma_tilde = std::sqrt(std::max(0.0, variance));

  double rival = -std::numeric_limits<double>::infinity();
  for (Eigen::Index y = 0; y < belief.means.size(); ++y) {
    if (y != i) rival = std::max(rival, belief.means[y]);
  }
  const double gap = std::abs(belief.means[i] - rival);

  KgScore score;
  score.alternative = x;
  KgClosedForm cf;
  cf.sigma_tilde = sigma_tilde;
  if (sigma_tilde > 0) {
    cf.zeta = -gap / sigma_tilde;
  } else {
    cf.zeta = gap == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  cf.f_zeta = f_zeta(cf.zeta);
  score.nu = sigma_tilde > 0 ? sigma_tilde * cf.f_zeta : 0.0;
  score.closed_form = cf;
  return score;
}

KgScore kg_independent(const IndependentGaussianBelief& belief, std::size_t x) { return kg_repeated(belief, x, 1.0); }

KgStarResult kg_star(const IndependentGaussianBelief& belief, std::size_t x, int k_max) {
  if (k_max < 1) throw InputError("k_max must be >= 1");
  KgStarResult out;
  out.best_average = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double nu = kg_repeated(belief, x, k).nu;
    const double avg = nu / k;
    out.nu.push_back(nu);
    out.average.push_back(avg);
    if (avg > out.best_average) {
      out.best_average = avg;
      out.k_best = static_cast<std::size_t>(k);
    }
  }
  return out;
}

bool detect_s_curve(const IndependentGaussianBelief& belief, std::size_t x) {
  return kg_repeated(belief, x, 2.0).nu / 2.0 > kg_repeated(belief, x, 1.0).nu;
}

KgScore kg_monte_carlo(const BeliefState& belief, std::size_t x, std::size_t samples, RandomStream& rng) {
  if (samples == 0) throw InputError("Monte-Carlo KG needs M >= 1 samples");
  if (x >= size(belief)) throw DomainError("unknown alternative index " + std::to_string(x));
  return mc_with_draws(belief, x, make_draws(belief, samples, rng));
}

std::vector<KgScore> kg_monte_carlo_all(const BeliefState& belief, const std::vector<std::size_t>& candidates,
                                        std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InputError("Monte-Carlo KG needs M >= 1 samples");
  RandomStream rng(seed);
  const Draws draws = make_draws(belief, samples, rng);
  std::vector<KgScore> out;
  out.reserve(candidates.size());
  for (std::size_t x : candidates) {
    if (x >= size(belief)) throw DomainError("unknown alternative index " + std::to_string(x));
    out.push_back(mc_with_draws(belief, x, draws));
  }
  return out;
}

namespace {

KgScore offline_single(const BeliefState& belief, std::size_t x, const KgOptions& options, std::uint64_t seed) {
  if (const auto* ind = std::get_if<IndependentGaussianBelief>(&belief)) {
    if (ind->size() < 2) {
      KgScore zero;
      zero.alternative = x;
      return zero;
    }
    if (options.kg_star) {
      KgScore s = kg_independent(*ind, x);
      s.nu = kg_star(*ind, x, options.k_max).best_average;
      return s;
    }
    return kg_independent(*ind, x);
  }
  return kg_monte_carlo_all(belief, {x}, options.samples, seed).front();
}

}  // namespace

std::vector<KgScore> kg_offline_scores(const BeliefState& belief, const KgOptions& options, std::uint64_t seed) {
  const std::size_t m = size(belief);
  if (std::holds_alternative<IndependentGaussianBelief>(belief)) {
    std::vector<KgScore> out;
    for (std::size_t x = 0; x < m; ++x) out.push_back(offline_single(belief, x, options, seed));
    return out;
  }
  std::vector<std::size_t> all(m);
  for (std::size_t x = 0; x < m; ++x) all[x] = x;
  return kg_monte_carlo_all(belief, all, options.samples, seed);
}

KgScore online_kg(const BeliefState& belief, std::size_t x, int budget, int iteration, const KgOptions& options,
                  std::uint64_t seed) {
  if (iteration < 0) throw InputError("iteration must be >= 0");
  if (iteration > budget) throw InputError("iteration exceeds budget");
  if (x >= size(belief)) throw DomainError("unknown alternative index " + std::to_string(x));
  const double theta = point_estimates(belief)[static_cast<Eigen::Index>(x)];
  KgScore score;
  if (iteration < budget) score = offline_single(belief, x, options, seed);
  score.alternative = x;
  score.mode = KgMode::kOnline;
  score.nu = theta + static_cast<double>(budget - iteration) * score.nu;
  return score;
}

std::vector<SurfaceRow> kg_surface(const BeliefState& belief, const std::vector<std::size_t>& candidates,
                                   const KgOptions& options, std::uint64_t seed, int budget, int iteration) {
  if (candidates.empty()) throw InputError("KG surface needs a nonempty candidate grid");
  if (iteration < 0 || iteration > budget) throw InputError("iteration must lie in [0, budget]");
  const VectorXd theta = point_estimates(belief);
  const VectorXd sigma = truth_stddevs(belief);

  std::vector<KgScore> offline;
  if (std::holds_alternative<IndependentGaussianBelief>(belief)) {
    for (std::size_t x : candidates) {
      if (x >= size(belief)) throw DomainError("unknown alternative index " + std::to_string(x));
      offline.push_back(offline_single(belief, x, options, seed));
    }
  } else {
    offline = kg_monte_carlo_all(belief, candidates, options.samples, seed);
  }

  std::vector<SurfaceRow> rows;
  rows.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto x = static_cast<Eigen::Index>(candidates[i]);
    SurfaceRow row;
    row.alternative = candidates[i];
    row.theta = theta[x];
    row.sigma = sigma[x];
    row.nu = offline[i].nu;
    row.nu_online = theta[x] + static_cast<double>(budget - iteration) * offline[i].nu;
    row.standard_error = offline[i].standard_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace optilearn
