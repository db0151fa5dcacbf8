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
#include "qpecf/qpe_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace qpecf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxSimulatedQubits = 16;

double wrap_unit(double theta) {
  double r = theta - std::floor(theta);
  return r >= 1.0 ? 0.0 : r;
}

int qubits_for(std::size_t count) {
  int q = 0;
  while ((std::size_t{1} << q) < count) ++q;
  return q;
}

}  // namespace

SimUnitary::SimUnitary(std::vector<double> eigenphases, std::vector<Complex> amplitudes)
    : eigenphases_(std::move(eigenphases)), amplitudes_(std::move(amplitudes)) {
  if (eigenphases_.empty()) throw DomainError("unitary needs at least one eigenphase");
  if (eigenphases_.size() != amplitudes_.size()) {
    throw DomainError("eigenphase and amplitude lists differ in length");
  }
  double total = 0.0;
  for (const Complex& a : amplitudes_) total += std::norm(a);
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("system amplitudes are not normalised (sum |a|^2 = " +
                      std::to_string(total) + ")");
  }
  for (double& theta : eigenphases_) {
    if (!std::isfinite(theta)) throw DomainError("non-finite eigenphase");
    theta = wrap_unit(theta);
  }
  system_qubits_ = qubits_for(eigenphases_.size());
}

SimUnitary SimUnitary::eigenstate(double theta) { return SimUnitary({theta}, {Complex{1.0}}); }

SimUnitary SimUnitary::from_model(const PhaseModel& model) {
  std::vector<double> phases;
  std::vector<Complex> amps;
  for (const auto& c : model.components()) {
    phases.push_back(c.theta);
    amps.emplace_back(std::sqrt(c.weight));
  }
  // sqrt then square can drift by an ulp per component; renormalise.
  double total = 0.0;
  for (const Complex& a : amps) total += std::norm(a);
  for (Complex& a : amps) a /= std::sqrt(total);
  return SimUnitary(std::move(phases), std::move(amps));
}

StateVector::StateVector(int recording_qubits, int system_qubits)
    : recording_qubits_(recording_qubits),
      system_qubits_(system_qubits),
      amps_(std::size_t{1} << (recording_qubits + system_qubits)) {}

double StateVector::norm() const {
  double total = 0.0;
  for (const Complex& a : amps_) total += std::norm(a);
  return std::sqrt(total);
}

StateVector prepare_state(const RegisterSpec& spec, const SimUnitary& unitary) {
  if (spec.qubits() > kMaxSimulatedQubits) {
    throw DomainError("statevector simulation supports at most " +
                      std::to_string(kMaxSimulatedQubits) + " recording qubits");
  }
  StateVector state(spec.qubits(), unitary.system_qubits());
  const auto amps = unitary.amplitudes();
  for (std::size_t j = 0; j < amps.size(); ++j) state.at(0, j) = amps[j];
  return state;
}

void apply_hadamards(StateVector& state) {
  const double scale = 1.0 / std::numbers::sqrt2;
  const std::size_t dim = state.recording_dim();
  const std::size_t sys = state.system_dim();
  for (std::size_t bit = 1; bit < dim; bit <<= 1) {
    for (std::size_t x = 0; x < dim; ++x) {
      if (x & bit) continue;
      for (std::size_t j = 0; j < sys; ++j) {
        const Complex a = state.at(x, j);
        const Complex b = state.at(x | bit, j);
        state.at(x, j) = scale * (a + b);
        state.at(x | bit, j) = scale * (a - b);
      }
    }
  }
}

void apply_controlled_powers(StateVector& state, const SimUnitary& unitary) {
  if (unitary.system_qubits() != state.system_qubits()) {
    throw DomainError("unitary acts on " + std::to_string(unitary.system_qubits()) +
                      " system qubits, state has " + std::to_string(state.system_qubits()));
  }
  const auto phases = unitary.eigenphases();
  const std::size_t dim = state.recording_dim();
  for (int q = 0; q < state.recording_qubits(); ++q) {
    const std::size_t bit = std::size_t{1} << q;
    // U^(2^q) is diagonal with entries e^{2 pi i theta_j 2^q}; scaling by 2^q is exact.
    std::vector<Complex> kick(phases.size());
    for (std::size_t j = 0; j < phases.size(); ++j) {
      kick[j] = std::polar(1.0, kTwoPi * wrap_unit(std::ldexp(phases[j], q)));
    }
    for (std::size_t x = 0; x < dim; ++x) {
      if (!(x & bit)) continue;
      for (std::size_t j = 0; j < phases.size(); ++j) state.at(x, j) *= kick[j];
    }
  }
}

void apply_inverse_qft(StateVector& state) {
  const std::size_t dim = state.recording_dim();
  const std::size_t sys = state.system_dim();
  std::vector<Complex> roots(dim);
  for (std::size_t t = 0; t < dim; ++t) {
    roots[t] = std::polar(1.0, -kTwoPi * static_cast<double>(t) / static_cast<double>(dim));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<Complex> column(dim);
  std::vector<Complex> out(dim);
  for (std::size_t j = 0; j < sys; ++j) {
    for (std::size_t x = 0; x < dim; ++x) column[x] = state.at(x, j);
    for (std::size_t y = 0; y < dim; ++y) {
      Complex acc{};
      for (std::size_t x = 0; x < dim; ++x) acc += roots[(y * x) & (dim - 1)] * column[x];
      out[y] = scale * acc;
    }
    for (std::size_t y = 0; y < dim; ++y) state.at(y, j) = out[y];
  }
}

OutcomeDistribution measure_recording(const RegisterSpec& spec, const StateVector& state) {
  if (static_cast<std::int64_t>(state.recording_dim()) != spec.dim()) {
    throw DomainError("state recording register does not match the register spec");
  }
  std::vector<double> probs(state.recording_dim(), 0.0);
  for (std::size_t y = 0; y < state.recording_dim(); ++y) {
    for (std::size_t j = 0; j < state.system_dim(); ++j) probs[y] += std::norm(state.at(y, j));
    probs[y] = std::min(probs[y], 1.0);
  }
  return OutcomeDistribution(spec, std::move(probs));
}

OutcomeDistribution simulate_distribution(const RegisterSpec& spec, const SimUnitary& unitary) {
  StateVector state = prepare_state(spec, unitary);
  apply_hadamards(state);
  apply_controlled_powers(state, unitary);
  apply_inverse_qft(state);
  return measure_recording(spec, state);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
}

CounterRng::CounterRng(std::uint64_t seed) noexcept : key_(splitmix64(seed + kGoldenGamma)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return splitmix64(key_ + counter_ * kGoldenGamma);
}

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w + kGoldenGamma));
  return h;
}

ShotHistogram::ShotHistogram(RegisterSpec spec, std::vector<std::uint64_t> counts,
                             std::uint64_t shots)
    : spec_(spec), counts_(std::move(counts)), shots_(shots) {
  if (shots_ == 0) throw DomainError("histogram must contain at least one shot");
  if (static_cast<std::int64_t>(counts_.size()) != spec_.dim()) {
    throw DomainError("histogram has " + std::to_string(counts_.size()) + " bins, expected " +
                      std::to_string(spec_.dim()));
  }
  const std::uint64_t total = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  if (total != shots_) {
    throw DomainError("histogram counts sum to " + std::to_string(total) + ", shots is " +
                      std::to_string(shots_));
  }
}

ShotHistogram sample_shots(const OutcomeDistribution& dist, std::uint64_t shots,
                           std::uint64_t seed) {
  if (shots == 0) throw DomainError("shot count must be at least 1");
  const auto probs = dist.probs();
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  const double total = cdf.back();

  std::vector<std::uint64_t> counts(probs.size(), 0);
  CounterRng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    // u < total, so the first bin with cdf > u always carries positive mass.
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return ShotHistogram(dist.spec(), std::move(counts), shots);
}

OutcomeDistribution histogram_to_probs(const ShotHistogram& hist) {
  std::vector<double> probs(hist.counts().size());
  const double shots = static_cast<double>(hist.shots());
  std::transform(hist.counts().begin(), hist.counts().end(), probs.begin(),
                 [shots](std::uint64_t c) { return static_cast<double>(c) / shots; });
  return OutcomeDistribution(hist.spec(), std::move(probs));
}

nlohmann::ordered_json histogram_to_json(const ShotHistogram& hist) {
  nlohmann::ordered_json doc;
  doc["n"] = hist.spec().qubits();
  doc["shots"] = hist.shots();
  doc["counts"] = std::vector<std::uint64_t>(hist.counts().begin(), hist.counts().end());
  return doc;
}

ShotHistogram histogram_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DomainError("histogram: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "n" && key != "shots" && key != "counts") {
      throw DomainError("histogram: unknown field '" + key + "'");
    }
  }
  auto require_uint = [](const nlohmann::json& v, const std::string& field) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw DomainError("histogram: field '" + field + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  if (!doc.contains("n")) throw DomainError("histogram: missing field 'n'");
  if (!doc.contains("shots")) throw DomainError("histogram: missing field 'shots'");
  if (!doc.contains("counts")) throw DomainError("histogram: missing field 'counts'");
  const auto n = require_uint(doc["n"], "n");
  if (n > static_cast<std::uint64_t>(RegisterSpec::kMaxQubits)) {
    throw DomainError("histogram: field 'n' out of range");
  }
  const auto shots = require_uint(doc["shots"], "shots");
  if (!doc["counts"].is_array()) throw DomainError("histogram: field 'counts' must be an array");
  std::vector<std::uint64_t> counts;
  counts.reserve(doc["counts"].size());
  for (std::size_t i = 0; i < doc["counts"].size(); ++i) {
    counts.push_back(require_uint(doc["counts"][i], "counts[" + std::to_string(i) + "]"));
  }
  return ShotHistogram(RegisterSpec(static_cast<int>(n)), std::move(counts), shots);
}

}  // namespace qpecf
