#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "localparts/behavior.hpp"
#include "localparts/quantum.hpp"

using namespace localparts;
using cd = std::complex<double>;

namespace {

// Independent Born-rule oracle: probability of an outcome string as the
// expectation of a tensor product of 2x2 projectors (I + s M) / 2 with
// M = cos(theta) Z + sin(theta) X, built by explicit matrix products.
double oracle_probability(const std::vector<cd>& psi, const std::vector<double>& angles,
                          const std::vector<int>& signs) {
  const std::size_t n = angles.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<cd> v = psi;
  for (std::size_t q = 0; q < n; ++q) {
    const double c = std::cos(angles[q]);
    const double s = std::sin(angles[q]);
    const double sg = signs[q];
    const double p[2][2] = {{0.5 * (1 + sg * c), 0.5 * sg * s}, {0.5 * sg * s, 0.5 * (1 - sg * c)}};
    const std::size_t stride = std::size_t{1} << (n - 1 - q);
    std::vector<cd> w(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const int bit = (k / stride) % 2;
      const std::size_t k0 = bit ? k - stride : k;
      const std::size_t k1 = k0 + stride;
      w[k] = p[bit][0] * v[k0] + p[bit][1] * v[k1];
    }
    v = w;
  }
  cd acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) acc += std::conj(psi[k]) * v[k];
  return acc.real();
}

std::vector<cd> random_state(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<cd> a(dim);
  double s = 0.0;
  for (auto& x : a) {
    x = cd(g(rng), g(rng));
    s += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(s);
  return a;
}

}  // namespace

TEST(Behavior, IndexingIsLexicographicPartyZeroFirst) {
  Behavior b({2, 3});
  EXPECT_EQ(b.num_setting_tuples(), 6u);
  EXPECT_EQ(b.num_outcomes(), 4u);
  EXPECT_EQ(b.setting_index(std::vector<int>{1, 2}), 5u);
  EXPECT_EQ(b.setting_index(std::vector<int>{0, 1}), 1u);
  EXPECT_EQ(b.setting_tuple(4), (std::vector<int>{1, 1}));
  // Outcome index 2 = binary 10: party 0 has bit 1 (-1), party 1 bit 0 (+1).
  EXPECT_EQ(b.outcome_bit_of(2, 0), 1);
  EXPECT_EQ(b.outcome_bit_of(2, 1), 0);
}

TEST(Behavior, RejectsBadShapes) {
  EXPECT_THROW(Behavior(std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(Behavior(std::vector<int>{1, 1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(Behavior(std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(Behavior(std::vector<int>{2}, std::vector<double>(3)), std::invalid_argument);
}

TEST(Behavior, CheckDetectsBadRows) {
  Behavior b({1});
  b.at(0, 0) = 0.7;
  b.at(0, 1) = 0.2;
  EXPECT_THROW(b.check(), std::invalid_argument);
  b.at(0, 1) = 0.3;
  EXPECT_NO_THROW(b.check());
  b.at(0, 0) = 1.1;
  b.at(0, 1) = -0.1;
  EXPECT_THROW(b.check(), std::invalid_argument);
}

TEST(Behavior, ProductMarginalsRecoverFactors) {
  const Behavior a = coin_behavior({0.2, 0.9});
  const Behavior b = coin_behavior({0.5, 0.3, 0.6});
  const Behavior p = product_behavior({a, b});
  EXPECT_NEAR(p.normalization_error(), 0.0, 1e-15);
  const Behavior ma = averaged_marginal(p, {0});
  const Behavior mb = averaged_marginal(p, {1});
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(ma.at(k, 0), a.at(k, 0), 1e-15);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(mb.at(k, 0), b.at(k, 0), 1e-15);
  // E = (2p_a - 1)(2p_b - 1).
  EXPECT_NEAR(correlator(p, {1, 2}), (2 * 0.9 - 1) * (2 * 0.6 - 1), 1e-15);
}

TEST(Behavior, MarginalKeepsRemoteSettingDependence) {
  // Party 1 copies party 0's setting into its outcome: signaling.
  Behavior b({2, 1});
  b.at(b.setting_index(std::vector<int>{0, 0}), 0) = 1.0;  // ++
  b.at(b.setting_index(std::vector<int>{1, 0}), 1) = 1.0;  // +-
  const MarginalFamily fam = marginal(b, {1});
  ASSERT_EQ(fam.size(), 2u);
  EXPECT_EQ(fam[0].at(0, 0), 1.0);
  EXPECT_EQ(fam[1].at(0, 1), 1.0);
  EXPECT_THROW(marginal(b, {0, 1}), std::invalid_argument);
  EXPECT_THROW(marginal(b, {}), std::invalid_argument);
}

TEST(State, Validation) {
  EXPECT_THROW(StateVector({1.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(StateVector({1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(StateVector(std::vector<Amplitude>(32, 0.0)), std::invalid_argument);
  EXPECT_THROW(StateVector::normalized({0.0, 0.0}), std::invalid_argument);
  EXPECT_EQ(StateVector::normalized({3.0, 4.0}).amplitudes()[1], Amplitude(0.8));
  EXPECT_EQ(make_ghz3().qubits(), 3);
  EXPECT_EQ(make_zero_state(4).qubits(), 4);
}

TEST(Quantum, SingletCorrelatorClosedForm) {
  const StateVector s = make_singlet();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-7.0, 7.0);
  for (int k = 0; k < 500; ++k) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(quantum_correlator(s, {a, b}), -std::cos(a - b), 1e-13);
  }
}

TEST(Quantum, SingletMarginalsAreUniform) {
  const Behavior b = born_behavior(make_singlet(), {{0.0, 1.0, 2.5}, {0.3, -2.0}});
  for (std::size_t s = 0; s < b.num_setting_tuples(); ++s) {
    EXPECT_NEAR(b.at(s, 0) + b.at(s, 1), 0.5, 1e-14);
    EXPECT_NEAR(b.at(s, 0) + b.at(s, 2), 0.5, 1e-14);
  }
}

TEST(Quantum, GhzCorrelatorsClosedForm) {
  // For (|000> + |111>)/sqrt2 only XXX survives among odd products:
  // E(a, b, c) = sin a sin b sin c, and every pair has E = cos cos.
  const StateVector g = make_ghz3();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    EXPECT_NEAR(quantum_correlator(g, {a, b, c}), std::sin(a) * std::sin(b) * std::sin(c), 1e-13);
    const Behavior beh = born_behavior(g, {{a}, {b}, {c}});
    const Behavior ab = averaged_marginal(beh, {0, 1});
    EXPECT_NEAR(correlator(ab, {0, 0}), std::cos(a) * std::cos(b), 1e-13);
  }
}

TEST(Quantum, WeightedGhzReducesToGhzAndProduct) {
  EXPECT_NEAR(quantum_correlator(make_weighted_ghz3(std::numbers::pi / 4), {0.3, 0.4, 1.1}),
              quantum_correlator(make_ghz3(), {0.3, 0.4, 1.1}), 1e-14);
  // alpha = 0 is |000>: Z outcomes all +1, so E(0,0,0) = 1.
  EXPECT_NEAR(quantum_correlator(make_weighted_ghz3(0.0), {0.0, 0.0, 0.0}), 1.0, 1e-15);
}

TEST(Quantum, MatchesProjectorOracleOnRandomStates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.2, 3.2);
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto psi = random_state(rng, std::size_t{1} << n);
      std::vector<std::vector<double>> settings(static_cast<std::size_t>(n));
      for (auto& s : settings) s = {u(rng), u(rng)};
      const Behavior b = born_behavior(StateVector(psi), settings);
      EXPECT_NEAR(b.normalization_error(), 0.0, 1e-12);
      for (std::size_t s = 0; s < b.num_setting_tuples(); ++s) {
        const std::vector<int> t = b.setting_tuple(s);
        std::vector<double> angles;
        for (int k = 0; k < n; ++k) angles.push_back(settings[k][t[k]]);
        for (std::size_t o = 0; o < b.num_outcomes(); ++o) {
          std::vector<int> signs;
          for (int k = 0; k < n; ++k) signs.push_back(outcome_value(b.outcome_bit_of(o, k)));
          EXPECT_NEAR(b.at(s, o), oracle_probability(psi, angles, signs), 1e-12);
        }
      }
    }
  }
}

TEST(Quantum, RejectsMismatchedSettings) {
  EXPECT_THROW(born_behavior(make_singlet(), {{0.0}}), std::invalid_argument);
  EXPECT_THROW(born_behavior(make_singlet(), {{0.0}, {}}), std::invalid_argument);
  EXPECT_THROW(quantum_correlator(make_singlet(), {0.0}), std::invalid_argument);
}
