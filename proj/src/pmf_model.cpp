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
#include "qpecf/pmf_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qpecf {

namespace {

constexpr double kPi = std::numbers::pi;

// Offsets closer than this to 0 (mod M) are evaluated by series.
constexpr double kSeriesRadius = 1e-6;

// Offset split as d = whole + frac, d reduced to (-M/2, M/2], frac in [-1/2, 1/2].
struct ReducedOffset {
  double d;
  double whole;
  double frac;
};

ReducedOffset reduce(double offset, std::int64_t dim) {
  const double m = static_cast<double>(dim);
  double d = std::remainder(offset, m);
  if (d <= -0.5 * m) d += m;
  const double whole = std::nearbyint(d);
  return {d, whole, d - whole};
}

bool near_peak(const ReducedOffset& r) {
  return r.whole == 0.0 && std::abs(r.frac) < kSeriesRadius;
}

// sin(x) / (M sin(x / M)) to second order in x.
double peak_ratio_series(double frac, double m) {
  const double x = kPi * frac;
  return 1.0 - x * x / 6.0 * (1.0 - 1.0 / (m * m));
}

double peak_score_series(double frac, double m) {
  return 2.0 * kPi * kPi / 3.0 * frac * (m - 1.0 / m);
}

void check_outcome(const RegisterSpec& spec, std::int64_t y) {
  if (y < 0 || y >= spec.dim()) {
    throw DomainError("outcome index " + std::to_string(y) + " outside [0, " +
                      std::to_string(spec.dim()) + ")");
  }
}

void check_phase(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw DomainError("phase " + std::to_string(theta) + " outside [0, 1)");
  }
}

}  // namespace

RegisterSpec::RegisterSpec(int n) : n_(n) {
  if (n < 1 || n > kMaxQubits) {
    throw DomainError("recording qubit count " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
  }
}

PhaseModel::PhaseModel(std::vector<PhaseComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("phase model needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    check_phase(c.theta);
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw DomainError("component weight " + std::to_string(c.weight) + " outside [0, 1]");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("component weights sum to " + std::to_string(total) + ", expected 1");
  }
  std::sort(components_.begin(), components_.end(),
            [](const PhaseComponent& a, const PhaseComponent& b) { return a.theta < b.theta; });
  for (std::size_t j = 1; j < components_.size(); ++j) {
    if (components_[j].theta == components_[j - 1].theta) {
      throw DomainError("duplicate phase in model");
    }
  }
}

OutcomeDistribution::OutcomeDistribution(RegisterSpec spec, std::vector<double> probs)
    : spec_(spec), probs_(std::move(probs)) {
  if (static_cast<std::int64_t>(probs_.size()) != spec_.dim()) {
    throw DomainError("distribution has " + std::to_string(probs_.size()) + " entries, expected " +
                      std::to_string(spec_.dim()));
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw DomainError("probabilities sum to " + std::to_string(total));
  }
}

namespace detail {

double pmf_at_offset(double offset, std::int64_t dim) {
  const double m = static_cast<double>(dim);
  const ReducedOffset r = reduce(offset, dim);
  if (near_peak(r)) {
    const double ratio = peak_ratio_series(r.frac, m);
    return ratio * ratio;
  }
  const double num = std::sin(kPi * r.frac);
  const double den = m * std::sin(kPi * r.d / m);
  return std::min(1.0, (num * num) / (den * den));
}

double score_at_offset(double offset, std::int64_t dim) {
  const double m = static_cast<double>(dim);
  const ReducedOffset r = reduce(offset, dim);
  if (near_peak(r)) return peak_score_series(r.frac, m);
  if (r.frac == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double inner = kPi * r.d / m;
  const double outer = kPi * r.frac;
  return 2.0 * kPi * (std::cos(inner) / std::sin(inner) - m * std::cos(outer) / std::sin(outer));
}

double dpmf_dtheta_at_offset(double offset, std::int64_t dim) {
  const double m = static_cast<double>(dim);
  const ReducedOffset r = reduce(offset, dim);
  if (near_peak(r)) {
    const double ratio = peak_ratio_series(r.frac, m);
    return ratio * ratio * peak_score_series(r.frac, m);
  }
  const double inner = kPi * r.d / m;
  const double s = std::sin(inner);
  const double sf = std::sin(kPi * r.frac);
  // dP/dd, then chain rule with dd/dtheta = -M.
  const double dp_dd = kPi / (m * m * s * s) *
                       (std::sin(2.0 * kPi * r.frac) - 2.0 / m * sf * sf * std::cos(inner) / s);
  return -m * dp_dd;
}

}  // namespace detail

double pmf_single(const RegisterSpec& spec, double theta, std::int64_t y) {
  check_phase(theta);
  check_outcome(spec, y);
  return detail::pmf_at_offset(detail::offset(y, theta, spec.dim()), spec.dim());
}

double pmf_multi(const RegisterSpec& spec, const PhaseModel& model, std::int64_t y) {
  check_outcome(spec, y);
  double p = 0.0;
  for (const auto& c : model.components()) {
    p += c.weight * detail::pmf_at_offset(detail::offset(y, c.theta, spec.dim()), spec.dim());
  }
  return p;
}

OutcomeDistribution analytic_distribution(const RegisterSpec& spec, const PhaseModel& model) {
  std::vector<double> probs(static_cast<std::size_t>(spec.dim()));
  for (std::int64_t y = 0; y < spec.dim(); ++y) {
    probs[static_cast<std::size_t>(y)] = pmf_multi(spec, model, y);
  }
  return OutcomeDistribution(spec, std::move(probs));
}

double score(const RegisterSpec& spec, double theta, std::int64_t y) {
  check_phase(theta);
  check_outcome(spec, y);
  return detail::score_at_offset(detail::offset(y, theta, spec.dim()), spec.dim());
}

double pmf_derivative(const RegisterSpec& spec, double theta, std::int64_t y) {
  check_phase(theta);
  check_outcome(spec, y);
  return detail::dpmf_dtheta_at_offset(detail::offset(y, theta, spec.dim()), spec.dim());
}

double fisher_information_at(const RegisterSpec& spec, double theta) {
  check_phase(theta);
  const double scaled = theta * static_cast<double>(spec.dim());
  if (scaled == std::nearbyint(scaled)) {
    throw DomainError("Fisher information requires a phase that is not a multiple of 1/M");
  }
  double fi = 0.0;
  for (std::int64_t y = 0; y < spec.dim(); ++y) {
    const double d = detail::offset(y, theta, spec.dim());
    const double s = detail::score_at_offset(d, spec.dim());
    fi += s * s * detail::pmf_at_offset(d, spec.dim());
  }
  return fi;
}

double fisher_information(const RegisterSpec& spec) {
  // 1/(3M) keeps every y - theta M off the integers.
  return fisher_information_at(spec, 1.0 / (3.0 * static_cast<double>(spec.dim())));
}

double total_fisher(const RegisterSpec& spec, std::uint64_t shots) {
  if (shots == 0) throw DomainError("shot count must be at least 1");
  return static_cast<double>(shots) * fisher_information(spec);
}

double crlb_mse(const RegisterSpec& spec, std::uint64_t shots) {
  return 1.0 / total_fisher(spec, shots);
}

std::int64_t circuit_depth_units(const RegisterSpec& spec) { return spec.dim() - 1; }

}  // namespace qpecf
