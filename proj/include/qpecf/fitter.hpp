// Copyright 2026 The qpecf Authors
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
/**
 * @file
 * Curve-fitting post-processing of QPE outcome distributions.
 *
 * fit_single follows the classic recipe: take the most likely outcome as the
 * coarse estimate, restrict the phase to within half a bin of it, fit the
 * analytic PMF by bounded least squares from both ends of that interval and keep
 * the fit with the lower residual variance. fit_multi extends this to a mixture
 * of J eigenphases with a multi-start over all left/right corner combinations.
 *
 * Residuals are unweighted differences of probabilities, r_y = P(y) - p_y.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "qpecf/bounded_nls.hpp"
#include "qpecf/pmf_model.hpp"

namespace qpecf {

struct FitOptions {
  NlsOptions solver{};
};

/// Phase interval reduced mod 1. When upper < lower the interval wraps through 0.
struct FitBounds {
  double lower;
  double upper;

  bool wrapped() const noexcept { return upper < lower; }
  double width() const noexcept;
  /// Wrapped comparison, endpoints included.
  bool contains(double theta) const noexcept;
};

struct FitResult {
  std::vector<double> phases;  // ascending, in [0, 1)
  std::vector<double> weights;  // same order as phases; {1.0} for single-phase fits
  std::vector<FitBounds> bounds;  // same order as phases
  double residual_variance = 0.0;
  /// Winning start. Single phase: 0 = left bound, 1 = right bound. Multi phase:
  /// bit j set when phase j (in fitting order) started from its right bound.
  std::uint32_t start_used = 0;
  int iterations = 0;
  bool converged = false;
};

/// Smallest y attaining the maximum probability.
std::int64_t argmax_guess(const OutcomeDistribution& dist);

/// Bin-resolution estimate argmax_guess / M.
double traditional_estimate(const OutcomeDistribution& dist);

/// Residual problem for a J-phase mixture fit in local (unwrapped) phase coordinates.
///
/// Parameters are [theta_1 .. theta_J, v_1 .. v_{J-1}] where the mixture weights
/// are stick-breaking fractions: w_j = v_j prod_{i<j} (1 - v_i), w_J = prod (1 - v_i).
/// For J = 2 this is simply w_1 = v_1, w_2 = 1 - v_1.
NlsProblem mixture_residual_problem(const OutcomeDistribution& dist, int components);

/// Stick-breaking fractions to mixture weights.
std::vector<double> stick_weights(std::span<const double> fractions);

/// Residual variance of a given parameter set under the fit objective (SSR / (M - p)).
double residual_variance_at(const OutcomeDistribution& dist, std::span<const double> phases,
                            std::span<const double> weights);

/// Single-phase fit. Throws FitError if both starts fail.
FitResult fit_single(const OutcomeDistribution& dist, const FitOptions& options = {});

/// J-phase fit. start_phases, when given, seeds the per-phase windows instead of the
/// J most likely outcomes. Throws DomainError for J < 2 or J above the number of
/// populated outcomes, FitError when every start fails.
FitResult fit_multi(const OutcomeDistribution& dist, int components,
                    std::optional<std::vector<double>> start_phases = std::nullopt,
                    const FitOptions& options = {});

/// {"phases", "weights", "residual_variance", "converged", "iterations", "bounds"}.
/// bounds is [lo, hi] for one phase and a list of such pairs otherwise.
nlohmann::ordered_json fit_result_to_json(const FitResult& result);

}  // namespace qpecf
