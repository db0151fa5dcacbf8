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
#include "qpecf/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpecf/format.hpp"

namespace qpecf {

namespace {

// Starts sit this many 1/M inside the phase window.
constexpr double kStartNudge = 1e-9;

double wrap_unit(double theta) {
  double r = theta - std::floor(theta);
  return r >= 1.0 ? 0.0 : r;
}

Interval window_for(std::int64_t bin, std::int64_t dim) {
  const double m = static_cast<double>(dim);
  return {(static_cast<double>(bin) - 0.5) / m, (static_cast<double>(bin) + 0.5) / m};
}

FitBounds to_fit_bounds(const Interval& local) {
  return {wrap_unit(local.lower), wrap_unit(local.upper)};
}

struct Attempt {
  NlsResult nls;
  std::uint32_t corner = 0;
};

// Runs the solver from every left/right corner of the phase windows and keeps the
// lowest residual variance. Later corners win ties, so with two starts the right
// start is returned unless the left one is strictly better.
Attempt best_over_corners(const OutcomeDistribution& dist, const std::vector<Interval>& windows,
                          const FitOptions& options) {
  const int components = static_cast<int>(windows.size());
  const NlsProblem problem = mixture_residual_problem(dist, components);
  const double nudge = kStartNudge / static_cast<double>(dist.spec().dim());

  std::vector<Interval> box = windows;
  for (int i = 0; i + 1 < components; ++i) box.push_back({0.0, 1.0});

  std::optional<Attempt> best;
  std::string failures;
  const std::uint32_t corners = std::uint32_t{1} << components;
  for (std::uint32_t corner = 0; corner < corners; ++corner) {
    Eigen::VectorXd start(static_cast<Eigen::Index>(box.size()));
    for (int j = 0; j < components; ++j) {
      const bool right = (corner >> j) & 1U;
      start[j] = right ? windows[j].upper - nudge : windows[j].lower + nudge;
    }
    // Uniform mixture weights in stick-breaking form.
    for (int i = 0; i + 1 < components; ++i) start[components + i] = 1.0 / (components - i);
    try {
      Attempt attempt{bounded_nls(problem, start, box, options.solver), corner};
      if (!best || attempt.nls.residual_variance <= best->nls.residual_variance) {
        best = std::move(attempt);
      }
    } catch (const SolverError& e) {
      failures += " [start " + std::to_string(corner) + ": " + e.what() + "]";
    }
  }
  if (!best) throw FitError("every fitting start failed:" + failures);
  return *best;
}

FitResult finish(const Attempt& attempt, const std::vector<Interval>& windows) {
  const int components = static_cast<int>(windows.size());
  const Eigen::VectorXd& x = attempt.nls.params;
  const std::vector<double> mixture = stick_weights(
      std::span<const double>(x.data() + components, static_cast<std::size_t>(components - 1)));

  std::vector<double> wrapped(static_cast<std::size_t>(components));
  for (int j = 0; j < components; ++j) wrapped[j] = wrap_unit(x[j]);
  std::vector<std::size_t> order(wrapped.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return wrapped[a] < wrapped[b]; });

  FitResult result;
  for (std::size_t idx : order) {
    result.phases.push_back(wrapped[idx]);
    result.weights.push_back(mixture[idx]);
    result.bounds.push_back(to_fit_bounds(windows[idx]));
  }
  result.residual_variance = attempt.nls.residual_variance;
  result.start_used = attempt.corner;
  result.iterations = attempt.nls.iterations;
  result.converged = attempt.nls.converged;
  return result;
}

}  // namespace

double FitBounds::width() const noexcept {
  return wrapped() ? upper - lower + 1.0 : upper - lower;
}

bool FitBounds::contains(double theta) const noexcept {
  if (wrapped()) return theta >= lower || theta <= upper;
  return theta >= lower && theta <= upper;
}

std::int64_t argmax_guess(const OutcomeDistribution& dist) {
  const auto probs = dist.probs();
  return std::max_element(probs.begin(), probs.end()) - probs.begin();
}

double traditional_estimate(const OutcomeDistribution& dist) {
  return static_cast<double>(argmax_guess(dist)) / static_cast<double>(dist.spec().dim());
}

std::vector<double> stick_weights(std::span<const double> fractions) {
  std::vector<double> w;
  w.reserve(fractions.size() + 1);
  double remaining = 1.0;
  double assigned = 0.0;
  for (double v : fractions) {
    w.push_back(v * remaining);
    assigned += w.back();
    remaining *= 1.0 - v;
  }
  // Closing weight taken as the complement so the weights sum to 1.
  w.push_back(std::max(0.0, 1.0 - assigned));
  return w;
}

NlsProblem mixture_residual_problem(const OutcomeDistribution& dist, int components) {
  if (components < 1) throw DomainError("mixture needs at least one component");
  const std::int64_t dim = dist.spec().dim();
  std::vector<double> observed(dist.probs().begin(), dist.probs().end());

  auto evaluate = [dim, components, observed = std::move(observed)](
                      const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const int free_weights = components - 1;
    const std::span<const double> fractions(x.data() + components,
                                            static_cast<std::size_t>(free_weights));
    const std::vector<double> w = stick_weights(fractions);

    // dw_j / dv_i for the stick-breaking map.
    Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(components, free_weights);
    for (int j = 0; j < components; ++j) {
      const double stick = j < free_weights ? fractions[j] : 1.0;
      for (int i = 0; i < free_weights && i <= j; ++i) {
        double prod = 1.0;
        for (int l = 0; l < j; ++l) {
          if (l != i) prod *= 1.0 - fractions[l];
        }
        dw(j, i) = i == j ? prod : -stick * prod;
      }
    }

    std::vector<double> p(static_cast<std::size_t>(components));
    for (std::int64_t y = 0; y < dim; ++y) {
      const auto yi = static_cast<std::size_t>(y);
      double model = 0.0;
      for (int j = 0; j < components; ++j) {
        const double d = detail::offset(y, x[j], dim);
        p[j] = detail::pmf_at_offset(d, dim);
        model += w[j] * p[j];
        if (jac) (*jac)(y, j) = w[j] * detail::dpmf_dtheta_at_offset(d, dim);
      }
      r[y] = model - observed[yi];
      if (jac) {
        for (int i = 0; i < free_weights; ++i) {
          double acc = 0.0;
          for (int j = 0; j < components; ++j) acc += p[j] * dw(j, i);
          (*jac)(y, components + i) = acc;
        }
      }
    }
  };
  return NlsProblem{static_cast<Eigen::Index>(dim), std::move(evaluate)};
}

double residual_variance_at(const OutcomeDistribution& dist, std::span<const double> phases,
                            std::span<const double> weights) {
  if (phases.size() != weights.size() || phases.empty()) {
    throw DomainError("phases and weights must be non-empty and of equal length");
  }
  const std::int64_t dim = dist.spec().dim();
  double ssr = 0.0;
  for (std::int64_t y = 0; y < dim; ++y) {
    double model = 0.0;
    for (std::size_t j = 0; j < phases.size(); ++j) {
      model += weights[j] * detail::pmf_at_offset(detail::offset(y, phases[j], dim), dim);
    }
    const double r = model - dist[y];
    ssr += r * r;
  }
  const auto params = static_cast<std::int64_t>(2 * phases.size() - 1);
  return ssr / static_cast<double>(std::max<std::int64_t>(1, dim - params));
}

FitResult fit_single(const OutcomeDistribution& dist, const FitOptions& options) {
  const std::vector<Interval> windows{window_for(argmax_guess(dist), dist.spec().dim())};
  return finish(best_over_corners(dist, windows, options), windows);
}

FitResult fit_multi(const OutcomeDistribution& dist, int components,
                    std::optional<std::vector<double>> start_phases, const FitOptions& options) {
  if (components < 2) throw DomainError("fit_multi needs at least two phases");
  const std::int64_t dim = dist.spec().dim();
  const auto probs = dist.probs();
  const auto populated = std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0; });
  if (components > populated) {
    throw DomainError("cannot fit " + std::to_string(components) + " phases to " +
                      std::to_string(populated) + " populated outcomes");
  }

  std::vector<std::int64_t> bins;
  if (start_phases) {
    if (static_cast<int>(start_phases->size()) != components) {
      throw DomainError("expected " + std::to_string(components) + " start phases");
    }
    for (double theta : *start_phases) {
      const auto bin = static_cast<std::int64_t>(std::llround(wrap_unit(theta) * dim)) % dim;
      if (std::find(bins.begin(), bins.end(), bin) != bins.end()) {
        throw DomainError("start phases fall in the same outcome bin");
      }
      bins.push_back(bin);
    }
  } else {
    std::vector<std::int64_t> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), std::int64_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    });
    bins.assign(order.begin(), order.begin() + components);
  }

  std::vector<Interval> windows;
  for (std::int64_t bin : bins) windows.push_back(window_for(bin, dim));
  return finish(best_over_corners(dist, windows, options), windows);
}

nlohmann::ordered_json fit_result_to_json(const FitResult& result) {
  auto rounded = [](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), round_sig12);
    return out;
  };
  nlohmann::ordered_json doc;
  doc["phases"] = rounded(result.phases);
  doc["weights"] = rounded(result.weights);
  doc["residual_variance"] = round_sig12(result.residual_variance);
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  auto pair = [](const FitBounds& b) {
    return nlohmann::ordered_json::array({round_sig12(b.lower), round_sig12(b.upper)});
  };
  if (result.bounds.size() == 1) {
    doc["bounds"] = pair(result.bounds.front());
  } else {
    auto list = nlohmann::ordered_json::array();
    for (const auto& b : result.bounds) list.push_back(pair(b));
    doc["bounds"] = list;
  }
  return doc;
}

}  // namespace qpecf
