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

#include "optilearn/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"

namespace optilearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<std::pair<PolicyKind, std::string_view>, 11> kPolicyNames{{
    {PolicyKind::kExploitation, "exploitation"},
    {PolicyKind::kExploration, "exploration"},
    {PolicyKind::kBoltzmann, "boltzmann"},
    {PolicyKind::kIntervalEstimation, "interval_estimation"},
    {PolicyKind::kUcb, "ucb"},
    {PolicyKind::kThompson, "thompson"},
    {PolicyKind::kBayesGreedy, "bayes_greedy"},
    {PolicyKind::kParametricCfa, "parametric_cfa"},
    {PolicyKind::kKgOffline, "kg_offline"},
    {PolicyKind::kKgOnline, "kg_online"},
    {PolicyKind::kGittins, "gittins"},
}};

constexpr std::array<std::pair<CfaFeature, std::string_view>, 7> kFeatureNames{{
    {CfaFeature::kSigma, "sigma"},
    {CfaFeature::kVariance, "variance"},
    {CfaFeature::kInverseCount, "inverse_count"},
    {CfaFeature::kUcbBonus, "ucb_bonus"},
    {CfaFeature::kRemaining, "remaining"},
    {CfaFeature::kSigmaRemaining, "sigma_remaining"},
    {CfaFeature::kKnowledgeGradient, "knowledge_gradient"},
}};

void require_nonempty(const DecisionContext& ctx) {
  if (ctx.belief == nullptr || size(*ctx.belief) == 0) throw DomainError("empty alternative set");
}

// Noise std per alternative for Gaussian beliefs.
VectorXd noise_stddevs(const BeliefState& belief) {
  if (const auto* b = std::get_if<IndependentGaussianBelief>(&belief)) {
    return b->noise_precisions.unaryExpr([](double p) { return std::isinf(p) ? 0.0 : 1.0 / std::sqrt(p); });
  }
  const auto m = static_cast<Eigen::Index>(size(belief));
  if (const auto* b = std::get_if<CorrelatedGaussianBelief>(&belief)) return VectorXd::Constant(m, std::sqrt(b->noise_variance));
  if (const auto* b = std::get_if<LinearGaussianBelief>(&belief)) return VectorXd::Constant(m, std::sqrt(b->noise_variance));
  throw UnsupportedBeliefError("sampled beliefs carry no Gaussian noise level");
}

std::size_t sample_from(const VectorXd& probabilities, RandomStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0) continue;
    last_positive = i;
    cumulative += probabilities[i];
    if (u < cumulative) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(last_positive);
}

std::uint64_t cfa_seed(const DecisionContext& ctx) {
  return derive_seed(0x6366612d6b67ULL, {static_cast<std::uint64_t>(ctx.iteration)});
}

VectorXd kg_values(const PolicyConfig& policy, const DecisionContext& ctx, std::uint64_t seed) {
  const auto scores = kg_offline_scores(*ctx.belief, policy.kg, seed);
  VectorXd nu(static_cast<Eigen::Index>(scores.size()));
  for (std::size_t i = 0; i < scores.size(); ++i) nu[static_cast<Eigen::Index>(i)] = scores[i].nu;
  return nu;
}

VectorXd thompson_best_frequencies(const BeliefState& belief, std::uint64_t seed) {
  constexpr int kDraws = 2000;
  const TruthSampler sampler(belief);
  RandomStream rng(seed);
  VectorXd freq = VectorXd::Zero(static_cast<Eigen::Index>(size(belief)));
  for (int i = 0; i < kDraws; ++i) freq[static_cast<Eigen::Index>(argmax(sampler.draw(rng).mu))] += 1.0;
  return freq / kDraws;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown policy kind '" + std::string(name) + "'");
}

std::string_view to_string(CfaFeature feature) {
  for (const auto& [f, name] : kFeatureNames) {
    if (f == feature) return name;
  }
  return "unknown";
}

CfaFeature cfa_feature_from_string(std::string_view name) {
  for (const auto& [f, n] : kFeatureNames) {
    if (n == name) return f;
  }
  throw ConfigError("unknown CFA feature '" + std::string(name) + "'");
}

// --- GittinsTable ---------------------------------------------------------

void GittinsTable::validate() const {
  if (s.empty() || s.size() != gamma.size()) throw InputError("Gittins table needs matching nonempty s and gamma grids", "gittins");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw InputError("Gittins s grid must be strictly increasing", "gittins.s");
  }
  if (!(discount > 0 && discount < 1)) throw InputError("Gittins discount must lie in (0, 1)", "gittins.discount");
}

double GittinsTable::operator()(double s_value) const {
  if (s_value <= s.front()) return gamma.front();
  if (s_value >= s.back()) return gamma.back();
  const auto it = std::upper_bound(s.begin(), s.end(), s_value);
  const std::size_t hi = static_cast<std::size_t>(it - s.begin());
  const std::size_t lo = hi - 1;
  const double t = (s_value - s[lo]) / (s[hi] - s[lo]);
  return gamma[lo] + t * (gamma[hi] - gamma[lo]);
}

// --- PolicyConfig ---------------------------------------------------------

std::string PolicyConfig::label() const { return id.empty() ? std::string(to_string(kind)) : id; }

void PolicyConfig::validate() const {
  if (!(boltzmann_beta >= 0)) throw ConfigError("boltzmann_beta must be >= 0", "boltzmann_beta");
  if (!std::isfinite(theta_ie)) throw ConfigError("theta_ie must be finite", "theta_ie");
  if (!std::isfinite(theta_ucb)) throw ConfigError("theta_ucb must be finite", "theta_ucb");
  if (kg.samples == 0) throw ConfigError("samples must be >= 1", "samples");
  if (kg.k_max < 1) throw ConfigError("k_max must be >= 1", "k_max");
  if (kind == PolicyKind::kParametricCfa && cfa_coefficients.size() != cfa_features.size()) {
    throw ConfigError("coefficients and features must have equal length", "coefficients");
  }
  if (kind == PolicyKind::kGittins) {
    try {
      gittins.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what(), e.field_path());
    }
  }
}

PolicyConfig policy_from_json(const nlohmann::json& doc, const std::string& path) {
  namespace ju = json_util;
  if (!doc.is_object()) throw ConfigError(path + ": policy must be an object", path);
  PolicyConfig p;
  const std::string kind_path = ju::join(path, "kind");
  try {
    p.kind = policy_kind_from_string(ju::as_string(ju::require(doc, "kind", path), kind_path));
  } catch (const ConfigError& e) {
    if (!e.field_path().empty()) throw;
    throw ConfigError(kind_path + ": " + e.what(), kind_path);
  }
  for (const auto& [key, value] : doc.items()) {
    const std::string key_path = ju::join(path, key);
    if (key == "kind") continue;
    if (key == "id") p.id = ju::as_string(value, key_path);
    else if (key == "theta_ie") p.theta_ie = ju::as_number(value, key_path);
    else if (key == "boltzmann_beta") p.boltzmann_beta = ju::as_number(value, key_path);
    else if (key == "theta_ucb") p.theta_ucb = ju::as_number(value, key_path);
    else if (key == "coefficients") p.cfa_coefficients = [&] {
      const VectorXd v = ju::as_vector(value, key_path);
      return std::vector<double>(v.data(), v.data() + v.size());
    }();
    else if (key == "features") {
      const auto names = ju::as_string_list(value, key_path);
      p.cfa_features.clear();
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          p.cfa_features.push_back(cfa_feature_from_string(names[i]));
        } catch (const ConfigError& e) {
          throw ConfigError(ju::index(key_path, i) + ": " + e.what(), ju::index(key_path, i));
        }
      }
    } else if (key == "samples") {
      const auto m = ju::as_integer(value, key_path);
      if (m < 1) throw ConfigError(key_path + ": samples must be >= 1", key_path);
      p.kg.samples = static_cast<std::size_t>(m);
    } else if (key == "kg_star") p.kg.kg_star = ju::as_bool(value, key_path);
    else if (key == "k_max") p.kg.k_max = static_cast<int>(ju::as_integer(value, key_path));
    else if (key == "without_replacement") p.without_replacement = ju::as_bool(value, key_path);
    else if (key == "tie_break") {
      const std::string rule = ju::as_string(value, key_path);
      if (rule == "lowest_index") p.tie_break = TieBreak::kLowestIndex;
      else if (rule == "random") p.tie_break = TieBreak::kRandom;
      else throw ConfigError(key_path + ": unknown tie_break '" + rule + "'", key_path);
    } else if (key == "gittins") {
      p.gittins.discount = ju::number_or(value, "discount", 0.9, key_path);
      const VectorXd s = ju::as_vector(ju::require(value, "s", key_path), ju::join(key_path, "s"));
      const VectorXd g = ju::as_vector(ju::require(value, "gamma", key_path), ju::join(key_path, "gamma"));
      p.gittins.s.assign(s.data(), s.data() + s.size());
      p.gittins.gamma.assign(g.data(), g.data() + g.size());
    } else {
      throw ConfigError(key_path + ": unknown policy field '" + key + "'", key_path);
    }
  }
  try {
    p.validate();
  } catch (const ConfigError& e) {
    const std::string fp = ju::join(path, e.field_path());
    throw ConfigError(fp + ": " + e.what(), fp);
  }
  return p;
}

nlohmann::json to_json(const PolicyConfig& p) {
  nlohmann::json doc;
  doc["kind"] = std::string(to_string(p.kind));
  if (!p.id.empty()) doc["id"] = p.id;
  switch (p.kind) {
    case PolicyKind::kBoltzmann: doc["boltzmann_beta"] = json_util::number(p.boltzmann_beta); break;
    case PolicyKind::kIntervalEstimation: doc["theta_ie"] = p.theta_ie; break;
    case PolicyKind::kUcb: doc["theta_ucb"] = p.theta_ucb; break;
    case PolicyKind::kParametricCfa: {
      doc["coefficients"] = p.cfa_coefficients;
      auto& f = doc["features"] = nlohmann::json::array();
      for (auto feature : p.cfa_features) f.push_back(std::string(to_string(feature)));
      break;
    }
    case PolicyKind::kKgOffline:
    case PolicyKind::kKgOnline:
      doc["samples"] = p.kg.samples;
      if (p.kg.kg_star) {
        doc["kg_star"] = true;
        doc["k_max"] = p.kg.k_max;
      }
      break;
    case PolicyKind::kGittins:
      doc["gittins"] = {{"discount", p.gittins.discount}, {"s", p.gittins.s}, {"gamma", p.gittins.gamma}};
      break;
    case PolicyKind::kExploration:
      if (p.without_replacement) doc["without_replacement"] = true;
      break;
    default: break;
  }
  if (p.tie_break == TieBreak::kRandom) doc["tie_break"] = "random";
  return doc;
}

void set_tunable(PolicyConfig& policy, const std::string& name, double value) {
  if (name == "theta_ie") policy.theta_ie = value;
  else if (name == "boltzmann_beta") policy.boltzmann_beta = value;
  else if (name == "theta_ucb") policy.theta_ucb = value;
  else if (name == "samples") policy.kg.samples = static_cast<std::size_t>(value);
  else if (name == "k_max") policy.kg.k_max = static_cast<int>(value);
  else if (name.rfind("coefficients[", 0) == 0 && name.back() == ']') {
    const std::size_t i = std::stoul(name.substr(13, name.size() - 14));
    if (i >= policy.cfa_coefficients.size()) throw ConfigError("coefficient index out of range: " + name, name);
    policy.cfa_coefficients[i] = value;
  } else {
    throw ConfigError("unknown tunable '" + name + "'", name);
  }
}

// --- DecisionContext ------------------------------------------------------

DecisionContext DecisionContext::fresh(const BeliefState& belief, int budget) {
  DecisionContext ctx;
  ctx.belief = &belief;
  ctx.counts.assign(size(belief), 0);
  ctx.budget = budget;
  return ctx;
}

VectorXd DecisionContext::utilities() const { return utility ? *utility : point_estimates(*belief); }

void DecisionContext::validate() const {
  require_nonempty(*this);
  if (counts.size() != size(*belief)) throw InputError("counts length differs from alternatives", "counts");
  for (int c : counts) {
    if (c < 0) throw InputError("counts must be nonnegative", "counts");
  }
  if (iteration < 0 || iteration > budget) throw InputError("iteration must lie in [0, budget]", "iteration");
  if (utility && utility->size() != static_cast<Eigen::Index>(counts.size())) {
    throw InputError("utility length differs from alternatives", "utility");
  }
}

PolicyStreams::PolicyStreams(std::uint64_t seed) : draws(derive_seed(seed, {1})), ties(derive_seed(seed, {2})) {}

// --- policies -------------------------------------------------------------

std::size_t argmax(const VectorXd& scores, TieBreak rule, RandomStream* ties) {
  if (scores.size() == 0) throw DomainError("empty alternative set");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  if (rule == TieBreak::kRandom && ties != nullptr) {
    std::vector<std::size_t> tied;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (scores[i] == scores[best]) tied.push_back(static_cast<std::size_t>(i));
    }
    if (tied.size() > 1) return tied[ties->uniform_index(tied.size())];
  }
  return static_cast<std::size_t>(best);
}

std::size_t pure_exploitation(const DecisionContext& ctx) {
  require_nonempty(ctx);
  return argmax(ctx.utilities());
}

std::size_t pure_exploration(const DecisionContext& ctx, RandomStream& rng) {
  require_nonempty(ctx);
  return rng.uniform_index(size(*ctx.belief));
}

VectorXd boltzmann_probabilities(const VectorXd& utilities, double beta) {
  if (!(beta >= 0)) throw InputError("Boltzmann beta must be >= 0", "boltzmann_beta");
  if (utilities.size() == 0) throw DomainError("empty alternative set");
  if (!utilities.allFinite()) throw InputError("utilities must be finite");
  const double top = utilities.maxCoeff();
  VectorXd p(utilities.size());
  if (std::isinf(beta)) {
    p = (utilities.array() == top).cast<double>().matrix();
  } else {
    p = (beta * (utilities.array() - top)).exp().matrix();
  }
  return p / p.sum();
}

std::size_t boltzmann(const DecisionContext& ctx, double beta, RandomStream& rng) {
  require_nonempty(ctx);
  return sample_from(boltzmann_probabilities(ctx.utilities(), beta), rng);
}

VectorXd interval_estimation_scores(const DecisionContext& ctx, double theta_ie) {
  require_nonempty(ctx);
  return ctx.utilities() + theta_ie * posterior_stddevs(*ctx.belief);
}

std::size_t interval_estimation(const DecisionContext& ctx, double theta_ie) {
  return argmax(interval_estimation_scores(ctx, theta_ie));
}

VectorXd ucb_scores(const DecisionContext& ctx, double theta_ucb) {
  require_nonempty(ctx);
  VectorXd scores = ctx.utilities();
  if (theta_ucb == 0.0) return scores;
  const double log_n = ctx.iteration >= 1 ? std::log(static_cast<double>(ctx.iteration)) : 0.0;
  for (Eigen::Index x = 0; x < scores.size(); ++x) {
    const int n_x = ctx.counts.empty() ? 0 : ctx.counts[static_cast<std::size_t>(x)];
    if (n_x == 0) {
      scores[x] = theta_ucb > 0 ? kInf : -kInf;
    } else {
      scores[x] += theta_ucb * std::sqrt(log_n / n_x);
    }
  }
  return scores;
}

std::size_t ucb(const DecisionContext& ctx, double theta_ucb) { return argmax(ucb_scores(ctx, theta_ucb)); }

std::size_t thompson(const DecisionContext& ctx, RandomStream& rng) {
  require_nonempty(ctx);
  return argmax(TruthSampler(*ctx.belief).draw(rng).mu);
}

std::size_t bayes_greedy(const DecisionContext& ctx) {
  require_nonempty(ctx);
  return argmax(point_estimates(*ctx.belief));
}

VectorXd parametric_cfa_scores(const DecisionContext& ctx, const std::vector<double>& coefficients,
                               const std::vector<CfaFeature>& features) {
  require_nonempty(ctx);
  if (coefficients.size() != features.size()) throw InputError("coefficients and features must have equal length");
  VectorXd scores = ctx.utilities();
  const auto m = scores.size();
  const double remaining = static_cast<double>(ctx.budget - ctx.iteration);
  std::optional<VectorXd> sigma;
  const auto get_sigma = [&]() -> const VectorXd& {
    if (!sigma) {
      try {
        sigma = posterior_stddevs(*ctx.belief);
      } catch (const UnsupportedBeliefError& e) {
        throw InputError(std::string("CFA feature evaluation failed: ") + e.what());
      }
    }
    return *sigma;
  };
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double c = coefficients[f];
    if (c == 0.0) continue;
    VectorXd phi(m);
    switch (features[f]) {
      case CfaFeature::kSigma: phi = get_sigma(); break;
      case CfaFeature::kVariance: phi = get_sigma().array().square().matrix(); break;
      case CfaFeature::kInverseCount:
        for (Eigen::Index x = 0; x < m; ++x) phi[x] = 1.0 / (1.0 + ctx.counts[static_cast<std::size_t>(x)]);
        break;
      case CfaFeature::kUcbBonus: {
        const double log_n = ctx.iteration >= 1 ? std::log(static_cast<double>(ctx.iteration)) : 0.0;
        for (Eigen::Index x = 0; x < m; ++x) {
          const int n_x = ctx.counts[static_cast<std::size_t>(x)];
          phi[x] = n_x == 0 ? kInf : std::sqrt(log_n / n_x);
        }
        break;
      }
      case CfaFeature::kRemaining: phi.setConstant(remaining); break;
      case CfaFeature::kSigmaRemaining: phi = get_sigma() * remaining; break;
      case CfaFeature::kKnowledgeGradient: {
        PolicyConfig kg;
        phi = kg_values(kg, ctx, cfa_seed(ctx));
        break;
      }
    }
    scores += c * phi;
  }
  return scores;
}

std::size_t parametric_cfa(const DecisionContext& ctx, const std::vector<double>& coefficients,
                           const std::vector<CfaFeature>& features) {
  return argmax(parametric_cfa_scores(ctx, coefficients, features));
}

VectorXd gittins_scores(const DecisionContext& ctx, const GittinsTable& table) {
  require_nonempty(ctx);
  table.validate();
  const VectorXd theta = ctx.utilities();
  const VectorXd sigma = posterior_stddevs(*ctx.belief);
  const VectorXd noise = noise_stddevs(*ctx.belief);
  VectorXd scores(theta.size());
  for (Eigen::Index x = 0; x < theta.size(); ++x) {
    scores[x] = noise[x] > 0 ? theta[x] + table(sigma[x] / noise[x]) * noise[x] : theta[x];
  }
  return scores;
}

VectorXd policy_scores(const PolicyConfig& policy, const DecisionContext& ctx, std::uint64_t seed) {
  ctx.validate();
  const auto m = static_cast<Eigen::Index>(size(*ctx.belief));
  switch (policy.kind) {
    case PolicyKind::kExploitation: return ctx.utilities();
    case PolicyKind::kExploration: return VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    case PolicyKind::kBoltzmann: return boltzmann_probabilities(ctx.utilities(), policy.boltzmann_beta);
    case PolicyKind::kIntervalEstimation: return interval_estimation_scores(ctx, policy.theta_ie);
    case PolicyKind::kUcb: return ucb_scores(ctx, policy.theta_ucb);
    case PolicyKind::kThompson: return thompson_best_frequencies(*ctx.belief, seed);
    case PolicyKind::kBayesGreedy: return point_estimates(*ctx.belief);
    case PolicyKind::kParametricCfa: return parametric_cfa_scores(ctx, policy.cfa_coefficients, policy.cfa_features);
    case PolicyKind::kKgOffline: return kg_values(policy, ctx, seed);
    case PolicyKind::kKgOnline: {
      const double remaining = static_cast<double>(ctx.budget - ctx.iteration);
      const VectorXd theta = point_estimates(*ctx.belief);
      if (remaining == 0.0) return theta;
      return theta + remaining * kg_values(policy, ctx, seed);
    }
    case PolicyKind::kGittins: return gittins_scores(ctx, policy.gittins);
  }
  throw ConfigError("unhandled policy kind");
}

std::size_t decide(const PolicyConfig& policy, const DecisionContext& ctx, PolicyStreams& streams) {
  ctx.validate();
  RandomStream* ties = policy.tie_break == TieBreak::kRandom ? &streams.ties : nullptr;
  switch (policy.kind) {
    case PolicyKind::kExploration: {
      if (!policy.without_replacement) return pure_exploration(ctx, streams.draws);
      const int least = *std::min_element(ctx.counts.begin(), ctx.counts.end());
      std::vector<std::size_t> pool;
      for (std::size_t x = 0; x < ctx.counts.size(); ++x) {
        if (ctx.counts[x] == least) pool.push_back(x);
      }
      return pool[streams.draws.uniform_index(pool.size())];
    }
    case PolicyKind::kBoltzmann: return boltzmann(ctx, policy.boltzmann_beta, streams.draws);
    case PolicyKind::kThompson: return argmax(TruthSampler(*ctx.belief).draw(streams.draws).mu, policy.tie_break, ties);
    default: {
      const std::uint64_t seed = streams.draws.next_u64();
      return argmax(policy_scores(policy, ctx, seed), policy.tie_break, ties);
    }
  }
}

void check_compatible(const PolicyConfig& policy, const BeliefState& belief) {
  const bool sampled = std::holds_alternative<SampledBelief>(belief);
  const std::string label = policy.label();
  const auto needs_sigma = [&] {
    if (sampled) {
      throw ConfigError("policy '" + label + "' (" + std::string(to_string(policy.kind)) +
                        ") needs per-alternative posterior std, which sampled beliefs lack");
    }
  };
  switch (policy.kind) {
    case PolicyKind::kIntervalEstimation:
    case PolicyKind::kGittins: needs_sigma(); break;
    case PolicyKind::kParametricCfa:
      for (std::size_t f = 0; f < policy.cfa_features.size(); ++f) {
        const auto feature = policy.cfa_features[f];
        if (feature == CfaFeature::kSigma || feature == CfaFeature::kVariance || feature == CfaFeature::kSigmaRemaining) {
          needs_sigma();
        }
      }
      break;
    case PolicyKind::kKgOffline:
    case PolicyKind::kKgOnline:
      if (policy.kg.kg_star && !std::holds_alternative<IndependentGaussianBelief>(belief)) {
        throw ConfigError("policy '" + label + "': kg_star requires an independent Gaussian belief");
      }
      break;
    default: break;
  }
  policy.validate();
}

}  // namespace optilearn
