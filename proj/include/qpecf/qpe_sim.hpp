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
 * Statevector simulation of the QPE circuit and shot sampling.
 *
 * The recording register holds n qubits (M = 2^n outcomes); the system register
 * holds ceil(log2 J) qubits on which the unitary is diagonal with eigenphases
 * theta_j. Amplitude index layout is x * system_dim + j.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "qpecf/pmf_model.hpp"

namespace qpecf {

using Complex = std::complex<double>;

/// Diagonal unitary on the system register together with the prepared system state.
class SimUnitary {
 public:
  /// Phases are reduced mod 1. Throws DomainError if the lists differ in length, are
  /// empty, or sum_j |a_j|^2 differs from 1 by more than 1e-12.
  SimUnitary(std::vector<double> eigenphases, std::vector<Complex> amplitudes);

  /// Single eigenstate with eigenphase theta.
  static SimUnitary eigenstate(double theta);
  /// Real amplitudes sqrt(weight_j) for each component of the model.
  static SimUnitary from_model(const PhaseModel& model);

  std::span<const double> eigenphases() const noexcept { return eigenphases_; }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  int system_qubits() const noexcept { return system_qubits_; }
  std::size_t system_dim() const noexcept { return std::size_t{1} << system_qubits_; }

 private:
  std::vector<double> eigenphases_;
  std::vector<Complex> amplitudes_;
  int system_qubits_;
};

class StateVector {
 public:
  StateVector(int recording_qubits, int system_qubits);

  int recording_qubits() const noexcept { return recording_qubits_; }
  int system_qubits() const noexcept { return system_qubits_; }
  std::size_t recording_dim() const noexcept { return std::size_t{1} << recording_qubits_; }
  std::size_t system_dim() const noexcept { return std::size_t{1} << system_qubits_; }

  Complex& at(std::size_t x, std::size_t j) { return amps_[x * system_dim() + j]; }
  const Complex& at(std::size_t x, std::size_t j) const { return amps_[x * system_dim() + j]; }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }

  double norm() const;

 private:
  int recording_qubits_;
  int system_qubits_;
  std::vector<Complex> amps_;
};

// Circuit stages, in the order simulate_distribution applies them.

/// |0...0> on the recording register, sum_j a_j |j> on the system register.
StateVector prepare_state(const RegisterSpec& spec, const SimUnitary& unitary);
/// Hadamard on every recording qubit (the register starts in |0...0>).
void apply_hadamards(StateVector& state);
/// Controlled-U^(2^q) from recording qubit q, for q = 0..n-1.
void apply_controlled_powers(StateVector& state, const SimUnitary& unitary);
/// Dense inverse DFT on the recording register, entries e^{-2 pi i y x / M} / sqrt(M).
void apply_inverse_qft(StateVector& state);
/// Marginal outcome probabilities of the recording register.
OutcomeDistribution measure_recording(const RegisterSpec& spec, const StateVector& state);

/// Exact outcome distribution of the QPE circuit. Throws DomainError for n > 16 or
/// a unitary whose system register does not match.
OutcomeDistribution simulate_distribution(const RegisterSpec& spec, const SimUnitary& unitary);

/// Counter-based generator: output i is the SplitMix64 finaliser applied to
/// key + i * golden-gamma. Streams depend only on (seed, draw index).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Order-sensitive hash of a sequence of 64-bit words.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept;

class ShotHistogram {
 public:
  /// Throws DomainError if counts.size() != M, the counts do not sum to shots, or shots == 0.
  ShotHistogram(RegisterSpec spec, std::vector<std::uint64_t> counts, std::uint64_t shots);

  const RegisterSpec& spec() const noexcept { return spec_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t shots() const noexcept { return shots_; }

  friend bool operator==(const ShotHistogram&, const ShotHistogram&) = default;

 private:
  RegisterSpec spec_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t shots_;
};

/// k independent inverse-CDF categorical draws. Deterministic in (dist, k, seed).
ShotHistogram sample_shots(const OutcomeDistribution& dist, std::uint64_t shots,
                           std::uint64_t seed);

/// Empirical distribution counts[y] / shots.
OutcomeDistribution histogram_to_probs(const ShotHistogram& hist);

/// {"n": int, "shots": int, "counts": [int x M]}
nlohmann::ordered_json histogram_to_json(const ShotHistogram& hist);
/// Inverse of histogram_to_json. Throws DomainError naming the offending field.
ShotHistogram histogram_from_json(const nlohmann::json& doc);

}  // namespace qpecf
