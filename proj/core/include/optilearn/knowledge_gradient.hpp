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

// Knowledge-gradient value of information.
//
// Closed form for independent Gaussian lookup beliefs, Monte-Carlo estimation for any
// belief, repetition-factor KG(*) with S-curve detection, and the online KG score.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "optilearn/belief.hpp"
#include "optilearn/rng.hpp"

namespace optilearn {

enum class KgMode { kOffline, kOnline };

struct KgClosedForm {
  double sigma_tilde = 0.0;
  double zeta = 0.0;
  double f_zeta = 0.0;
};

struct KgScore {
  std::size_t alternative = 0;
  double nu = 0.0;
  KgMode mode = KgMode::kOffline;
  std::optional<KgClosedForm> closed_form;
  std::size_t samples = 0;  // 0 for closed-form scores
  double standard_error = 0.0;
};

/// f(zeta) = zeta * Phi(zeta) + phi(zeta).
double f_zeta(double zeta);

/// Closed-form KG. DomainError for a single alternative; sigma-tilde = 0 gives nu = 0.
KgScore kg_independent(const IndependentGaussianBelief& belief, std::size_t x);

/// Closed-form KG with noise precision k * beta^W_x. InputError unless k >= 1.
KgScore kg_repeated(const IndependentGaussianBelief& belief, std::size_t x, double k);

struct KgStarResult {
  std::size_t k_best = 1;
  double best_average = 0.0;
  std::vector<double> nu;       // nu(k), k = 1..k_max
  std::vector<double> average;  // nu(k) / k
};

/// k_best = argmax_{1<=k<=k_max} nu(k)/k, ties to the smallest k.
KgStarResult kg_star(const IndependentGaussianBelief& belief, std::size_t x, int k_max);

/// True iff nu(2)/2 > nu(1).
bool detect_s_curve(const IndependentGaussianBelief& belief, std::size_t x);

/// Monte-Carlo KG: mean over M hypothetical outcomes of max_y theta^{n+1}_y, minus max_y theta^n_y.
KgScore kg_monte_carlo(const BeliefState& belief, std::size_t x, std::size_t samples, RandomStream& rng);

/// Monte-Carlo KG for every alternative using common random numbers: each candidate
/// consumes an identical stream seeded by `seed`, so results do not depend on the order
/// or subset of candidates scored.
std::vector<KgScore> kg_monte_carlo_all(const BeliefState& belief, const std::vector<std::size_t>& candidates,
                                        std::size_t samples, std::uint64_t seed);

struct KgOptions {
  std::size_t samples = 4000;
  /// Score independent beliefs by the KG(*) average value max_k nu(k)/k.
  bool kg_star = false;
  int k_max = 20;
};

/// Offline KG for every alternative: closed form for independent beliefs, Monte-Carlo otherwise.
std::vector<KgScore> kg_offline_scores(const BeliefState& belief, const KgOptions& options, std::uint64_t seed);

/// theta^n_x + (N - n) * nu^KG_x. InputError when n > N or n < 0.
KgScore online_kg(const BeliefState& belief, std::size_t x, int budget, int iteration, const KgOptions& options,
                  std::uint64_t seed);

struct SurfaceRow {
  std::size_t alternative = 0;
  double theta = 0.0;
  double sigma = 0.0;
  double nu = 0.0;
  double nu_online = 0.0;
  double standard_error = 0.0;
};

/// Expected-performance and KG values over a candidate subset. InputError when empty.
std::vector<SurfaceRow> kg_surface(const BeliefState& belief, const std::vector<std::size_t>& candidates,
                                   const KgOptions& options, std::uint64_t seed, int budget, int iteration);

}  // namespace optilearn
