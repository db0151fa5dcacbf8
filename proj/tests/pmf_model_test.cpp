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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace qpecf {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(RegisterSpec, RejectsOutOfRangeQubitCounts) {
  EXPECT_THROW(RegisterSpec(0), DomainError);
  EXPECT_THROW(RegisterSpec(31), DomainError);
  EXPECT_EQ(RegisterSpec(3).dim(), 8);
  EXPECT_EQ(RegisterSpec(30).dim(), std::int64_t{1} << 30);
}

TEST(PhaseModel, ValidatesComponents) {
  EXPECT_THROW(PhaseModel({}), DomainError);
  EXPECT_THROW(PhaseModel({{1.0, 1.0}}), DomainError);
  EXPECT_THROW(PhaseModel({{-0.1, 1.0}}), DomainError);
  EXPECT_THROW(PhaseModel({{0.2, 0.6}, {0.3, 0.6}}), DomainError);
  EXPECT_THROW(PhaseModel({{0.2, 0.5}, {0.2, 0.5}}), DomainError);
  const PhaseModel m({{0.5, 0.5}, {0.25, 0.5}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m.components()[0].theta, 0.25);
}

TEST(OutcomeDistribution, ValidatesLengthAndNormalisation) {
  const RegisterSpec spec(2);
  EXPECT_THROW(OutcomeDistribution(spec, {0.5, 0.5}), DomainError);
  EXPECT_THROW(OutcomeDistribution(spec, {0.5, 0.5, 0.5, -0.5}), DomainError);
  EXPECT_THROW(OutcomeDistribution(spec, {0.25, 0.25, 0.25, 0.2}), DomainError);
  EXPECT_NO_THROW(OutcomeDistribution(spec, {0.25, 0.25, 0.25, 0.25}));
}

TEST(Pmf, RejectsBadArguments) {
  const RegisterSpec spec(3);
  EXPECT_THROW(pmf_single(spec, 1.0, 0), DomainError);
  EXPECT_THROW(pmf_single(spec, 0.2, 8), DomainError);
  EXPECT_THROW(pmf_single(spec, 0.2, -1), DomainError);
}

TEST(Pmf, MatchesWorkedValue) {
  // theta = 1/3 with three qubits peaks at y = 3 with probability about 0.688.
  EXPECT_NEAR(pmf_single(RegisterSpec(3), 1.0 / 3.0, 3), 0.6878, 1e-4);
}

TEST(Pmf, AlignedPhaseExamples) {
  const RegisterSpec spec(3);
  EXPECT_EQ(pmf_single(spec, 0.375, 3), 1.0);
  EXPECT_EQ(pmf_single(spec, 0.375, 5), 0.0);
  const PhaseModel mix({{0.5, 0.5}, {1.0 / 3, 0.5}});
  EXPECT_NEAR(pmf_multi(spec, mix, 4), 0.5 + 0.5 * pmf_single(spec, 1.0 / 3, 4), 1e-15);
}

TEST(Pmf, RepresentablePhaseIsADelta) {
  for (int n = 1; n <= 10; ++n) {
    const RegisterSpec spec(n);
    const std::int64_t m = spec.dim();
    for (std::int64_t k : {std::int64_t{0}, m / 2, m - 1}) {
      const double theta = static_cast<double>(k) / static_cast<double>(m);
      for (std::int64_t y = 0; y < m; ++y) {
        EXPECT_NEAR(pmf_single(spec, theta, y), y == k ? 1.0 : 0.0, 1e-15) << n << " " << y;
      }
    }
  }
}

TEST(Pmf, MatchesGeometricSumOracle) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 8; ++n) {
    const RegisterSpec spec(n);
    for (int t = 0; t < 25; ++t) {
      const double theta = unit(gen);
      for (std::int64_t y = 0; y < spec.dim(); ++y) {
        EXPECT_NEAR(pmf_single(spec, theta, y), oracle::geometric_sum_pmf(n, theta, y), 1e-13);
      }
    }
  }
}

TEST(Pmf, NearPeakSeriesIsContinuous) {
  const RegisterSpec spec(5);
  const double m = 32.0;
  for (double eps : {1e-5, 1e-6, 1e-7, 1e-9, 1e-12}) {
    const double theta = 7.0 / m + eps / m;
    EXPECT_NEAR(pmf_single(spec, theta, 7), oracle::geometric_sum_pmf(5, theta, 7), 1e-14);
  }
}

TEST(Pmf, SumsToOneForEveryPhase) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 12; ++n) {
    const RegisterSpec spec(n);
    for (int t = 0; t < 10; ++t) {
      const auto dist = analytic_distribution(spec, PhaseModel::single(unit(gen)));
      double total = 0.0;
      for (double p : dist.probs()) {
        EXPECT_GE(p, 0.0);
        total += p;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Pmf, MixtureIsWeightedSum) {
  const RegisterSpec spec(4);
  const PhaseModel model({{0.13, 0.3}, {0.61, 0.7}});
  for (std::int64_t y = 0; y < spec.dim(); ++y) {
    EXPECT_NEAR(pmf_multi(spec, model, y),
                oracle::geometric_sum_mixture(4, {{0.13, 0.3}, {0.61, 0.7}}, y), 1e-13);
  }
}

TEST(Score, MatchesFiniteDifferenceOfLogPmf) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 6; ++n) {
    const RegisterSpec spec(n);
    for (int t = 0; t < 20; ++t) {
      const double theta = 0.05 + 0.9 * unit(gen);
      for (std::int64_t y = 0; y < spec.dim(); ++y) {
        if (pmf_single(spec, theta, y) < 1e-4) continue;
        const double fd = oracle::central_difference(
            [&](double t) { return std::log(oracle::geometric_sum_pmf(n, t, y)); }, theta, 1e-6);
        EXPECT_NEAR(score(spec, theta, y), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Score, VanishesAtRepresentablePeakAndIsNanAtZeros) {
  const RegisterSpec spec(3);
  EXPECT_NEAR(score(spec, 3.0 / 8.0, 3), 0.0, 1e-12);
  EXPECT_TRUE(std::isnan(score(spec, 3.0 / 8.0, 4)));
}

TEST(PmfDerivative, MatchesFiniteDifferenceAndIsFiniteEverywhere) {
  const RegisterSpec spec(4);
  for (double theta : {0.0, 0.0625, 0.1, 0.33, 0.5, 0.9375}) {
    for (std::int64_t y = 0; y < spec.dim(); ++y) {
      const double d = pmf_derivative(spec, theta, y);
      ASSERT_TRUE(std::isfinite(d));
      const double fd = oracle::central_difference(
          [&](double t) { return oracle::geometric_sum_pmf(4, t, y); }, theta, 1e-6);
      EXPECT_NEAR(d, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(PmfDerivative, DerivativesSumToZero) {
  for (int n = 1; n <= 8; ++n) {
    const RegisterSpec spec(n);
    double total = 0.0;
    for (std::int64_t y = 0; y < spec.dim(); ++y) total += pmf_derivative(spec, 0.271, y);
    EXPECT_NEAR(total, 0.0, 1e-9);
  }
}

TEST(Fisher, TabulatedValues) {
  const std::vector<std::pair<int, double>> table{
      {2, 197.39208802}, {3, 829.04676969}, {4, 3355.66549637}, {5, 13462.14040308},
      {6, 53888.04002995}, {7, 215591.6385373}, {8, 862406.03256634}};
  for (const auto& [n, fi] : table) {
    EXPECT_NEAR(fisher_information(RegisterSpec(n)) / fi, 1.0, 1e-9) << "n=" << n;
  }
}

TEST(Fisher, MatchesClosedFormAndIsPhaseIndependent) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 12; ++n) {
    const RegisterSpec spec(n);
    const double m = static_cast<double>(spec.dim());
    const double closed = 4.0 * kPi * kPi / 3.0 * (m * m - 1.0);
    EXPECT_NEAR(fisher_information(spec) / closed, 1.0, 1e-10);
    for (int t = 0; t < 5; ++t) {
      double theta = unit(gen);
      if (std::abs(theta * m - std::round(theta * m)) < 1e-3) continue;
      EXPECT_NEAR(fisher_information_at(spec, theta) / closed, 1.0, 1e-8) << n << " " << theta;
    }
  }
}

TEST(Fisher, RejectsRepresentablePhase) {
  EXPECT_THROW(fisher_information_at(RegisterSpec(3), 0.25), DomainError);
}

TEST(Crlb, ScalesInverselyWithShotsAndFisher) {
  const RegisterSpec spec(3);
  EXPECT_THROW(total_fisher(spec, 0), DomainError);
  EXPECT_DOUBLE_EQ(total_fisher(spec, 1000), 1000 * fisher_information(spec));
  EXPECT_NEAR(std::sqrt(crlb_mse(spec, 1'000'000)), 3.473e-5, 1e-8);
  EXPECT_EQ(circuit_depth_units(spec), 7);
}

}  // namespace
}  // namespace qpecf
