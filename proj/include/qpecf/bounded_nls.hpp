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
 * Box-constrained nonlinear least squares.
 *
 * Minimises ||r(x)||^2 subject to lower <= x <= upper with a Levenberg-Marquardt
 * trust region: each trial step solves the Marquardt-scaled damped normal
 * equations on the free variables and is projected back onto the box. Variables
 * sitting on a bound with the gradient pointing outward are held fixed for the
 * step. The damping parameter follows Nielsen's gain-ratio update.
 */
#pragma once

#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "qpecf/errors.hpp"

namespace qpecf {

struct Interval {
  double lower;
  double upper;

  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
  double width() const noexcept { return upper - lower; }
};

/// Fills residuals (size residual_count) and, when jacobian is non-null, the
/// residual_count x params.size() Jacobian.
using ResidualFunction = std::function<void(const Eigen::VectorXd& params,
                                            Eigen::VectorXd& residuals,
                                            Eigen::MatrixXd* jacobian)>;

struct NlsProblem {
  Eigen::Index residual_count;
  ResidualFunction evaluate;
};

struct NlsOptions {
  double gradient_tolerance = 1e-12;  // on the projected gradient of ||r||, J^T r / ||r||
  double step_tolerance = 1e-12;      // on the accepted-or-trial step
  int max_iterations = 200;
};

enum class NlsStop { kGradient, kStep, kMaxIterations };

std::string to_string(NlsStop stop);

struct NlsResult {
  Eigen::VectorXd params;
  double ssr = 0.0;
  /// ssr / (residual_count - parameter count), denominator floored at 1.
  double residual_variance = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  NlsStop stop = NlsStop::kMaxIterations;
};

/// Throws DomainError when start is not strictly inside the box or the bounds are
/// malformed, SolverError when the residuals at the start are not finite. Trial
/// points with non-finite residuals are rejected like any other bad step.
NlsResult bounded_nls(const NlsProblem& problem, const Eigen::VectorXd& start,
                      std::span<const Interval> bounds, const NlsOptions& options = {});

}  // namespace qpecf
