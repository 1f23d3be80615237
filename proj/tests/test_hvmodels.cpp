#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "localparts/hvmodels.hpp"
#include "localparts/inequality.hpp"
#include "localparts/quantum.hpp"
#include "localparts/signaling.hpp"

using namespace localparts;

namespace {

Geometry line(std::vector<double> xs, std::vector<double> betas, double c = 1.0, std::vector<double> ts = {}) {
  Geometry g;
  g.c = c;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    g.devices.push_back(Event{ts.empty() ? 0.0 : ts[k], xs[k], 0.0});
    g.boosts.emplace_back(betas[k]);
  }
  return g;
}

Behavior chsh_singlet() {
  const ChainOptimum a = equally_spaced_chain_angles(2);
  return born_behavior(make_singlet(), {a.alice_angles, a.bob_angles});
}

}  // namespace

TEST(Geometry, Validation) {
  EXPECT_NO_THROW(line({0, 1}, {0, 0}).validate());
  EXPECT_THROW(line({0, 0}, {0, 0}).validate(), std::invalid_argument);
  Geometry g = line({0, 1}, {0, 0});
  g.boosts.pop_back();
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(Coordination, ModelKinds) {
  const Geometry g = line({-1, 1}, {-0.1, 0.1});
  ModelConfig m;
  EXPECT_TRUE(coordination_map(m, g).all_on());
  m.kind = ModelKind::local;
  EXPECT_TRUE(coordination_map(m, g).all_off());
  m.kind = ModelKind::mixture;
  m.p = 0.3;
  EXPECT_TRUE(coordination_map(m, g).all_on());
  // Receding devices arriving together: before-before, coordination OFF.
  m.kind = ModelKind::multisim;
  EXPECT_TRUE(coordination_map(m, g).all_off());
  // The same devices at rest keep coordination.
  EXPECT_TRUE(coordination_map(m, line({-1, 1}, {0, 0})).all_on());
  // Approaching devices are never before-before.
  EXPECT_TRUE(coordination_map(m, line({-1, 1}, {0.1, -0.1})).all_on());
}

TEST(Coordination, FiniteSpeedCut) {
  ModelConfig m;
  m.kind = ModelKind::finite_speed;
  m.v = 10.0;
  // L = 2, dt = 0.1: L > v dt (2 > 1) -> OFF.
  EXPECT_TRUE(coordination_map(m, line({-1, 1}, {0, 0}, 1.0, {0.0, 0.1})).all_off());
  // dt = 0.3: 2 < 3 -> ON.
  EXPECT_TRUE(coordination_map(m, line({-1, 1}, {0, 0}, 1.0, {0.0, 0.3})).all_on());
  m.v = 0.0;
  EXPECT_THROW(coordination_map(m, line({-1, 1}, {0, 0})), std::invalid_argument);
}

TEST(Coordination, PairScenarioUsesSlowerRecession) {
  const Geometry g = line({0, 10}, {-0.2, 0.05});
  const TimingScenario s = pair_scenario(g, 0, 1, 0.0);
  EXPECT_DOUBLE_EQ(s.L, 10.0);
  EXPECT_DOUBLE_EQ(s.v_bb, 0.05);
  EXPECT_DOUBLE_EQ(outward_speed(g, 0, 1), 0.2);
  EXPECT_DOUBLE_EQ(outward_speed(g, 1, 0), 0.05);
}

TEST(Coordination, ThreeDevicesOnlyMovingPairOff) {
  const Geometry g = line({0, 10, 20}, {0, -0.01, 0.01});
  ModelConfig m;
  m.kind = ModelKind::multisim;
  const CoordinationMap map = coordination_map(m, g);
  EXPECT_TRUE(map.is_on(0, 1));
  EXPECT_TRUE(map.is_on(0, 2));
  EXPECT_FALSE(map.is_on(1, 2));
  EXPECT_EQ(map.mask(), 0b011);
}

TEST(Effective, AllOffIsProductOfMarginals) {
  const Behavior t = chsh_singlet();
  ModelConfig m;
  m.kind = ModelKind::multisim;
  const Behavior e = effective_behavior(m, line({-1, 1}, {-0.1, 0.1}), t);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(e.at(s, o), 0.25, 1e-15);
}

TEST(Effective, HubConstructionKeepsHubMarginals) {
  const double h = std::numbers::pi / 2;
  const Behavior t = born_behavior(make_ghz3(), {{0.0, h}, {0.0, h}, {0.0, h}});
  CoordinationMap map = CoordinationMap::all(3, true);
  map.on[2] = false;  // bc
  const Behavior q = behavior_under(map, t);
  EXPECT_NEAR(q.normalization_error(), 0.0, 1e-14);
  for (const auto& pair : {std::vector<int>{0, 1}, std::vector<int>{0, 2}}) {
    const Behavior a = averaged_marginal(t, pair);
    const Behavior b = averaged_marginal(q, pair);
    for (std::size_t k = 0; k < a.table().size(); ++k) EXPECT_NEAR(a.table()[k], b.table()[k], 1e-14);
    EXPECT_LE(signaling_distance(q, pair), 1e-14);
  }
  // B and C alone see nothing; jointly they see A's setting.
  EXPECT_LE(signaling_distance(q, {1}), 1e-14);
  EXPECT_LE(signaling_distance(q, {2}), 1e-14);
  EXPECT_NEAR(signaling_distance(q, {1, 2}), 0.5, 1e-14);
}

TEST(Effective, TwoPairsOffLeavesOnePair) {
  const Behavior t = born_behavior(make_ghz3(), {{0.0}, {0.0}, {0.0}});
  CoordinationMap map = CoordinationMap::all(3, false);
  map.on[0] = true;  // ab
  const Behavior q = behavior_under(map, t);
  // a = b perfectly, c an independent fair coin.
  EXPECT_NEAR(correlator(averaged_marginal(q, {0, 1}), {0, 0}), 1.0, 1e-14);
  EXPECT_NEAR(correlator(averaged_marginal(q, {0, 2}), {0, 0}), 0.0, 1e-14);
  EXPECT_NEAR(correlator(averaged_marginal(q, {1, 2}), {0, 0}), 0.0, 1e-14);
}

TEST(Effective, FourPartyMixedPatternUnsupported) {
  const Behavior t = born_behavior(make_zero_state(4), {{0.0}, {0.0}, {0.0}, {0.0}});
  CoordinationMap map = CoordinationMap::all(4, true);
  map.on[0] = false;
  EXPECT_THROW(behavior_under(map, t), UnsupportedConfiguration);
}

TEST(Effective, MixtureWithDeterministicLocalPart) {
  const Behavior t = chsh_singlet();
  ModelConfig m;
  m.kind = ModelKind::mixture;
  m.p = 0.25;
  const LocalBound lb = local_bound(ChainSpec(2));
  m.local_strategy = DeterministicStrategy{lb.alice, lb.bob};
  const Behavior e = effective_behavior(m, line({-1, 1}, {0, 0}), t);
  EXPECT_NEAR(chain_value(e, ChainSpec(2)), 0.75 * 2.0 * std::numbers::sqrt2 + 0.25 * 2.0, 1e-13);
  m.local_strategy = DeterministicStrategy{{1}, {1, 1}};
  EXPECT_THROW(effective_behavior(m, line({-1, 1}, {0, 0}), t), std::invalid_argument);
}

TEST(Sampling, DeterministicAcrossWorkerCounts) {
  const Behavior t = chsh_singlet();
  ModelConfig m;
  m.kind = ModelKind::mixture;
  m.p = 0.3;
  const Geometry g = line({-1, 1}, {0, 0});
  const std::uint64_t n = 3 * kChunkSize + 17;
  const auto a = sample_runs(m, g, t, {}, n, 42, {1});
  const auto b = sample_runs(m, g, t, {}, n, 42, {3});
  const auto c = sample_runs(m, g, t, {}, n, 42, {8});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  const auto d = sample_runs(m, g, t, {}, n, 43, {1});
  EXPECT_NE(a, d);
  // A shorter run is a prefix of a longer one.
  const auto e = sample_runs(m, g, t, {}, 1000, 42, {1});
  EXPECT_TRUE(std::equal(e.begin(), e.end(), a.begin()));
}

TEST(Sampling, BlockScheduleHitsExactFraction) {
  const Behavior t = chsh_singlet();
  ModelConfig m;
  m.kind = ModelKind::mixture;
  m.p = 0.25;
  m.schedule = SwitchSchedule::blocks;
  m.block = 10;
  const auto runs = sample_runs(m, line({-1, 1}, {0, 0}), t, {}, 4000, 1, {});
  std::size_t local = 0;
  for (const auto& r : runs) local += r.coordination == 0;
  EXPECT_EQ(local, 1000u);
  // Whole blocks switch together.
  for (std::size_t k = 0; k < runs.size(); k += 10)
    for (std::size_t j = 1; j < 10; ++j) EXPECT_EQ(runs[k].coordination, runs[k + j].coordination);
}

TEST(Sampling, EmpiricalCorrelatorsWithinFiveSigma) {
  const Behavior t = chsh_singlet();
  ModelConfig m;
  const auto runs = sample_runs(m, line({-1, 1}, {0, 0}), t, {}, 200000, 7, {2});
  Tally tally({2, 2});
  tally.add(runs);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const Estimate e = tally.correlator({x, y});
      const double expected = correlator(t, {x, y});
      EXPECT_LT(std::abs(e.value - expected), 5.0 * e.std_error);
      EXPECT_NEAR(e.std_error, std::sqrt((1 - e.value * e.value) / static_cast<double>(e.samples)), 1e-5);
    }
  const Behavior f = tally.frequencies();
  EXPECT_NEAR(f.normalization_error(), 0.0, 1e-12);
}

TEST(Sampling, ScheduleRestrictsTuples) {
  const Behavior t = chsh_singlet();
  SettingsSchedule s;
  s.tuples = {{1, 0}};
  const auto runs = sample_runs(ModelConfig{}, line({-1, 1}, {0, 0}), t, s, 100, 3);
  for (const auto& r : runs) {
    EXPECT_EQ(r.settings[0], 1);
    EXPECT_EQ(r.settings[1], 0);
  }
  s.tuples = {{0, 0}, {1, 1}};
  s.cyclic = true;
  const auto cyc = sample_runs(ModelConfig{}, line({-1, 1}, {0, 0}), t, s, 4, 3);
  EXPECT_EQ(cyc[0].settings[0], 0);
  EXPECT_EQ(cyc[1].settings[0], 1);
  EXPECT_EQ(cyc[2].settings[0], 0);
  EXPECT_THROW(sample_runs(ModelConfig{}, line({-1, 1}, {0, 0}), t, {}, 0, 3), std::invalid_argument);
}

TEST(Sampling, SplitMixReferenceValue) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Csv, HeaderAndBlankColumns) {
  RunRecord r;
  r.trial = 5;
  r.settings = {1, 0, 0, 0};
  r.outcomes = {-1, 1, 1, 1};
  r.coordination = 0;
  std::ostringstream os;
  write_runs_csv(os, {r}, 2);
  EXPECT_EQ(os.str(), "trial,x,y,z,a,b,c,coord_ab,coord_ac,coord_bc\n5,1,0,,-1,1,,OFF,,\n");
  r.coordination = 0b101;
  std::ostringstream os3;
  write_runs_csv(os3, {r}, 3);
  EXPECT_EQ(os3.str(), "trial,x,y,z,a,b,c,coord_ab,coord_ac,coord_bc\n5,1,0,0,-1,1,1,ON,OFF,ON\n");
  EXPECT_THROW(write_runs_csv(os, {r}, 4), std::invalid_argument);
}

TEST(Estimates, CombineAddsVariances) {
  const Estimate a{0.5, 0.03, 100};
  const Estimate b{0.25, 0.04, 100};
  const Estimate c = combine({{1, a}, {-1, b}});
  EXPECT_DOUBLE_EQ(c.value, 0.25);
  EXPECT_NEAR(c.std_error, 0.05, 1e-15);
}
