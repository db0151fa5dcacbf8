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
#include "qpecf/bounded_nls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qpecf {

std::string to_string(NlsStop stop) {
  switch (stop) {
    case NlsStop::kGradient: return "gradient";
    case NlsStop::kStep: return "step";
    case NlsStop::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

struct Evaluation {
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double ssr = 0.0;
};

bool evaluate(const NlsProblem& problem, const Eigen::VectorXd& x, Evaluation& out) {
  out.residuals.resize(problem.residual_count);
  out.jacobian.resize(problem.residual_count, x.size());
  problem.evaluate(x, out.residuals, &out.jacobian);
  if (!out.residuals.allFinite() || !out.jacobian.allFinite()) return false;
  out.ssr = out.residuals.squaredNorm();
  return std::isfinite(out.ssr);
}

Eigen::VectorXd project(const Eigen::VectorXd& x, std::span<const Interval> box) {
  Eigen::VectorXd p(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = std::clamp(x[i], box[static_cast<std::size_t>(i)].lower,
                      box[static_cast<std::size_t>(i)].upper);
  }
  return p;
}

// x - project(x - g), evaluated per component so gradients below the spacing of x survive.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   std::span<const Interval> box) {
  Eigen::VectorXd pg(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Interval& b = box[static_cast<std::size_t>(i)];
    pg[i] = g[i] > 0.0 ? std::min(g[i], x[i] - b.lower) : std::max(g[i], x[i] - b.upper);
  }
  return pg;
}

}  // namespace

NlsResult bounded_nls(const NlsProblem& problem, const Eigen::VectorXd& start,
                      std::span<const Interval> bounds, const NlsOptions& options) {
  const Eigen::Index p = start.size();
  if (p == 0) throw DomainError("bounded_nls: no parameters");
  if (static_cast<std::size_t>(p) != bounds.size()) {
    throw DomainError("bounded_nls: " + std::to_string(bounds.size()) + " bounds for " +
                      std::to_string(p) + " parameters");
  }
  if (problem.residual_count < 1) throw DomainError("bounded_nls: no residuals");
  for (Eigen::Index i = 0; i < p; ++i) {
    const Interval& b = bounds[static_cast<std::size_t>(i)];
    if (!(b.lower < b.upper)) throw DomainError("bounded_nls: empty bound interval");
    if (!(start[i] > b.lower && start[i] < b.upper)) {
      throw DomainError("bounded_nls: start parameter " + std::to_string(i) +
                        " is not strictly inside its bounds");
    }
  }

  NlsResult result;
  Eigen::VectorXd x = start;
  Evaluation cur;
  if (!evaluate(problem, x, cur)) {
    throw SolverError("bounded_nls: non-finite residuals at the starting point");
  }
  result.evaluations = 1;

  Eigen::MatrixXd normal = cur.jacobian.transpose() * cur.jacobian;
  Eigen::VectorXd gradient = cur.jacobian.transpose() * cur.residuals;
  const double tiny = std::numeric_limits<double>::min();
  double damping = 1e-3 * std::max(normal.diagonal().maxCoeff(), tiny);
  double growth = 2.0;

  Evaluation trial;
  result.stop = NlsStop::kMaxIterations;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    // Tested on the gradient of ||r|| rather than ||r||^2, so the criterion does not
    // fire early near a zero-residual minimum where J^T r shrinks faster than the error.
    const double residual_norm = std::sqrt(cur.ssr);
    if (residual_norm == 0.0 || projected_gradient(x, gradient, bounds).norm() <
                                    options.gradient_tolerance * residual_norm) {
      result.stop = NlsStop::kGradient;
      break;
    }

    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < p; ++i) {
      const Interval& b = bounds[static_cast<std::size_t>(i)];
      const bool pinned = (x[i] <= b.lower && gradient[i] > 0.0) ||
                          (x[i] >= b.upper && gradient[i] < 0.0);
      if (!pinned) free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    const double diag_floor = std::max(1e-12 * normal.diagonal().maxCoeff(), tiny);
    Eigen::MatrixXd lhs(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      for (Eigen::Index b = 0; b < nf; ++b) lhs(a, b) = normal(free[a], free[b]);
      lhs(a, a) += damping * std::max(normal(free[a], free[a]), diag_floor);
      rhs[a] = -gradient[free[a]];
    }
    const Eigen::VectorXd free_step = lhs.ldlt().solve(rhs);

    Eigen::VectorXd candidate = x;
    for (Eigen::Index a = 0; a < nf; ++a) candidate[free[a]] += free_step[a];
    candidate = project(candidate, bounds);
    const Eigen::VectorXd step = candidate - x;
    if (!step.allFinite() || step.norm() < options.step_tolerance) {
      result.stop = NlsStop::kStep;
      break;
    }

    ++result.evaluations;
    const bool finite = evaluate(problem, candidate, trial);
    const double predicted = cur.ssr - (cur.residuals + cur.jacobian * step).squaredNorm();
    const double actual = finite ? cur.ssr - trial.ssr : -1.0;
    if (finite && predicted > 0.0 && actual > 0.0 && actual / predicted > 1e-4) {
      const double gain = actual / predicted;
      x = candidate;
      std::swap(cur, trial);
      normal = cur.jacobian.transpose() * cur.jacobian;
      gradient = cur.jacobian.transpose() * cur.residuals;
      damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      growth = 2.0;
    } else {
      damping *= growth;
      growth *= 2.0;
    }
  }

  result.iterations = iter;
  result.converged = result.stop != NlsStop::kMaxIterations;
  result.params = x;
  result.ssr = cur.ssr;
  const auto dof = std::max<Eigen::Index>(1, problem.residual_count - p);
  result.residual_variance = cur.ssr / static_cast<double>(dof);
  return result;
}

}  // namespace qpecf
