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
 * Closed-form QPE outcome statistics: the probability mass function for one or
 * several eigenphases, the score function, per-shot Fisher information and the
 * Cramér-Rao bound on the mean squared error.
 *
 * Phases are measured in revolutions: the unitary's eigenvalue is e^{2 pi i theta}.
 * All functions are pure and thread-safe.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpecf/errors.hpp"

namespace qpecf {

/// Recording-register shape: n qubits, M = 2^n outcomes.
class RegisterSpec {
 public:
  static constexpr int kMaxQubits = 30;

  /// Throws DomainError unless 1 <= n <= kMaxQubits.
  explicit RegisterSpec(int n);

  int qubits() const noexcept { return n_; }
  std::int64_t dim() const noexcept { return std::int64_t{1} << n_; }

  friend bool operator==(const RegisterSpec&, const RegisterSpec&) = default;

 private:
  int n_;
};

struct PhaseComponent {
  double theta;   // revolutions, [0, 1)
  double weight;  // |a_j|^2, [0, 1]
};

/// Mixture of eigenphases. Components are kept sorted by theta.
class PhaseModel {
 public:
  /// Validates weights (each in [0,1], sum 1 within 1e-12) and phases (in [0,1),
  /// pairwise distinct). Components are sorted ascending by theta.
  explicit PhaseModel(std::vector<PhaseComponent> components);

  static PhaseModel single(double theta) { return PhaseModel({{theta, 1.0}}); }

  std::span<const PhaseComponent> components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

 private:
  std::vector<PhaseComponent> components_;
};

/// Probability vector over the M outcomes of a register.
class OutcomeDistribution {
 public:
  /// Throws DomainError if probs has the wrong length, an entry outside [0,1],
  /// or a total that differs from 1 by more than 1e-10.
  OutcomeDistribution(RegisterSpec spec, std::vector<double> probs);

  const RegisterSpec& spec() const noexcept { return spec_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::int64_t y) const { return probs_[static_cast<std::size_t>(y)]; }
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(probs_.size()); }

 private:
  RegisterSpec spec_;
  std::vector<double> probs_;
};

/// P(y) for a single eigenphase theta.
double pmf_single(const RegisterSpec& spec, double theta, std::int64_t y);

/// P(y) for a weighted mixture of eigenphases.
double pmf_multi(const RegisterSpec& spec, const PhaseModel& model, std::int64_t y);

/// Full outcome distribution of the analytic model.
OutcomeDistribution analytic_distribution(const RegisterSpec& spec, const PhaseModel& model);

/// d log P(y) / d theta.
///
/// Evaluated as 2 pi [cot(pi d / M) - M cot(pi d)], d = y - theta M. Near the peak
/// (d within 1e-6 of 0 mod M) a series is used and the value tends to 0. At an exact
/// zero of P (d a nonzero integer mod M) the log-likelihood has a pole and the result
/// is NaN.
double score(const RegisterSpec& spec, double theta, std::int64_t y);

/// dP(y)/d theta. Finite everywhere, including the zeros of P.
double pmf_derivative(const RegisterSpec& spec, double theta, std::int64_t y);

/// Per-shot Fisher information sum_y score(y)^2 P(y), evaluated in the
/// spectral-leakage regime at the reference phase theta = 1/(3M).
double fisher_information(const RegisterSpec& spec);

/// Same sum at an explicit phase. Requires y - theta M to be non-integral for every y.
double fisher_information_at(const RegisterSpec& spec, double theta);

/// k * fisher_information(spec). Throws DomainError for k == 0.
double total_fisher(const RegisterSpec& spec, std::uint64_t shots);

/// Lower bound on the MSE of any unbiased estimator from k shots: 1 / total_fisher.
double crlb_mse(const RegisterSpec& spec, std::uint64_t shots);

/// Number of controlled-U applications in the circuit, 2^n - 1.
std::int64_t circuit_depth_units(const RegisterSpec& spec);

namespace detail {

// Kernels in terms of the offset d = y - theta M. Periodic in d with period M, so
// callers may pass phases outside [0, 1).
double pmf_at_offset(double offset, std::int64_t dim);
double score_at_offset(double offset, std::int64_t dim);
double dpmf_dtheta_at_offset(double offset, std::int64_t dim);

inline double offset(std::int64_t y, double theta, std::int64_t dim) {
  return static_cast<double>(y) - theta * static_cast<double>(dim);
}

}  // namespace detail

}  // namespace qpecf
