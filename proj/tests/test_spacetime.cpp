#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "localparts/spacetime.hpp"

using namespace localparts;

TEST(Boost, RejectsSuperluminalBeta) {
  EXPECT_THROW(Boost(1.0), std::invalid_argument);
  EXPECT_THROW(Boost(-1.0), std::invalid_argument);
  EXPECT_THROW(Boost(1.5), std::invalid_argument);
  EXPECT_THROW(Boost(std::nan("")), std::invalid_argument);
  EXPECT_NO_THROW(Boost(0.999999));
}

TEST(Boost, HandComputedValues) {
  // beta = 0.6 gives gamma = 1.25 exactly; c = 1.
  const Boost b(0.6);
  EXPECT_NEAR(b.gamma(), 1.25, 1e-15);
  const Event e{2.0, 1.0, 7.0};
  const Event p = lorentz_boost(e, b, 1.0);
  EXPECT_NEAR(p.t, 1.25 * (2.0 - 0.6 * 1.0), 1e-15);  // 1.75
  EXPECT_NEAR(p.x, 1.25 * (1.0 - 0.6 * 2.0), 1e-15);  // -0.25
  EXPECT_EQ(p.y, 7.0);
}

TEST(Boost, SiUnits) {
  // One microsecond after the origin, 100 m away, seen from a frame at 0.8c.
  const double c = kSpeedOfLight;
  const Event e{1e-6, 100.0, 0.0};
  const Event p = lorentz_boost(e, Boost(0.8), c);
  const double g = 1.0 / 0.6;
  EXPECT_NEAR(p.t, g * (1e-6 - 0.8 * 100.0 / c), 1e-18);
  EXPECT_NEAR(p.x, g * (100.0 - 0.8 * c * 1e-6), 1e-9);
}

TEST(Boost, PreservesInterval) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> beta(-0.99, 0.99);
  for (int k = 0; k < 1000; ++k) {
    const Event a{u(rng), u(rng), u(rng)};
    const Event b{u(rng), u(rng), u(rng)};
    const Boost bo(beta(rng));
    const double before = interval_squared(a, b, 1.0);
    const double after = interval_squared(lorentz_boost(a, bo, 1.0), lorentz_boost(b, bo, 1.0), 1.0);
    EXPECT_NEAR(before, after, 1e-8 * (1.0 + std::abs(before)));
  }
}

TEST(Interval, Classification) {
  const Event o{0, 0, 0};
  EXPECT_EQ(interval_classify(o, Event{2, 1, 0}, 1.0), IntervalClass::timelike);
  EXPECT_EQ(interval_classify(o, Event{1, 2, 0}, 1.0), IntervalClass::spacelike);
  EXPECT_EQ(interval_classify(o, Event{5, 3, 4}, 1.0), IntervalClass::lightlike);
  EXPECT_TRUE(in_future_lightcone(o, Event{5, 3, 4}, 1.0));
  EXPECT_FALSE(in_future_lightcone(o, Event{-5, 3, 4}, 1.0));
  EXPECT_FALSE(in_future_lightcone(o, Event{1, 3, 4}, 1.0));
}

TEST(Timing, ValidatesScenario) {
  EXPECT_THROW(before_before(TimingScenario{0.0, 0.0, 1.0, 1.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(before_before(TimingScenario{1.0, -1.0, 1.0, 1.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(before_before(TimingScenario{1.0, 0.0, 10.0, 1.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(finite_speed_cut(TimingScenario{1.0, 0.0, 0.0, 0.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(equivalent_vbb(0.0), std::invalid_argument);
}

TEST(Timing, CriteriaAreStrict) {
  // c = 1: before_before iff dt < v_bb * L.
  EXPECT_TRUE(before_before(TimingScenario{10.0, 0.0, 0.1, 1.0, 1.0}));
  EXPECT_FALSE(before_before(TimingScenario{10.0, 1.0, 0.1, 1.0, 1.0}));
  EXPECT_FALSE(before_before(TimingScenario{10.0, 0.0, 0.0, 1.0, 1.0}));
  // finite_speed_cut iff L > v dt.
  EXPECT_TRUE(finite_speed_cut(TimingScenario{10.0, 1.0, 0.0, 9.0, 1.0}));
  EXPECT_FALSE(finite_speed_cut(TimingScenario{10.0, 1.0, 0.0, 10.0, 1.0}));
  EXPECT_TRUE(finite_speed_cut(TimingScenario{10.0, 0.0, 0.0, 1e5, 1.0}));
}

TEST(Timing, EquivalentSpeedFor1e5c) {
  const double c = kSpeedOfLight;
  EXPECT_NEAR(equivalent_vbb(1e5 * c), 2997.92458, 2997.92458 * 1e-12);
  EXPECT_NEAR(equivalent_vbb(1e5, 1.0), 1e-5, 1e-20);
}

TEST(Timing, EquivalenceOnGrid) {
  const double c = kSpeedOfLight;
  int checked = 0;
  for (int k = 1; k <= 10; ++k) {
    const double v_bb = 37.0 * k * k;
    const double v = equivalent_vbb(v_bb, c);
    for (int i = 1; i <= 60; ++i) {
      const double L = 173.0 * i;
      for (int j = 0; j < 60; ++j) {
        const double dt = (j + 0.37) / 30.0 * (v_bb / (c * c)) * L;
        const TimingScenario s{L, dt, v_bb, v, c};
        EXPECT_EQ(before_before(s), finite_speed_cut(s)) << L << " " << dt << " " << v_bb;
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 36000);
}

// Devices at -L/2 and +L/2 receding at v_bb, arrivals dt apart. Each
// device's frame should put its own arrival first exactly when the timing
// is before-before.
TEST(Timing, BeforeBeforeMatchesDeviceFrames) {
  const double c = kSpeedOfLight;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uL(10.0, 2e4);
  std::uniform_real_distribution<double> uv(0.0, 0.01 * c);
  std::uniform_real_distribution<double> ufrac(0.0, 2.0);
  int both = 0;
  for (int k = 0; k < 10000; ++k) {
    const double L = uL(rng);
    const double v_bb = uv(rng);
    const double dt = ufrac(rng) * v_bb * L / (c * c);
    const Event left{0.0, -0.5 * L, 0.0};
    const Event right{dt, 0.5 * L, 0.0};
    const Boost bl(-v_bb / c);
    const Boost br(v_bb / c);
    const bool left_first = device_frame_order(left, right, bl, c, 0.0) == TemporalOrder::before;
    const bool right_first = device_frame_order(right, left, br, c, 0.0) == TemporalOrder::before;
    const TimingScenario s{L, dt, v_bb, c, c};
    EXPECT_EQ(before_before(s), left_first && right_first) << L << " " << dt << " " << v_bb;
    both += left_first && right_first;
  }
  EXPECT_GT(both, 1000);
  EXPECT_LT(both, 9000);
}

TEST(PointD, CollinearExample) {
  const auto d = find_point_d(Event{0, 0, 0}, Event{0, 10, 0}, Event{0, 20, 0}, 1.0);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->advantage, 10.0);
  EXPECT_EQ(d->d.t, 5.0);
  EXPECT_EQ(d->d.x, 15.0);
  EXPECT_EQ(d->d.y, 0.0);
}

TEST(PointD, NoneWhenAIsBetween) {
  // A sits at the midpoint of B and C and fires at the same time: A's light
  // reaches every point no later than the later of B and C.
  EXPECT_FALSE(find_point_d(Event{0, 0, 0}, Event{0, -10, 0}, Event{0, 10, 0}, 1.0).has_value());
  // A long before B and C: everything they reach, A reached first.
  EXPECT_FALSE(find_point_d(Event{-100, 0, 0}, Event{0, 10, 0}, Event{0, 20, 0}, 1.0).has_value());
}

TEST(PointD, RandomLayoutsSatisfyAllPredicates) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_real_distribution<double> ut(-5.0, 5.0);
  int found = 0;
  for (int k = 0; k < 300; ++k) {
    const Event a{ut(rng), u(rng), u(rng)};
    const Event b{ut(rng), u(rng), u(rng)};
    const Event c{ut(rng), u(rng), u(rng)};
    const auto d = find_point_d(a, b, c, 1.0);
    if (!d) continue;
    ++found;
    EXPECT_GT(d->advantage, 0.0);
    EXPECT_TRUE(in_future_lightcone(b, d->d, 1.0));
    EXPECT_TRUE(in_future_lightcone(c, d->d, 1.0));
    EXPECT_FALSE(in_future_lightcone(a, d->d, 1.0));
  }
  EXPECT_GT(found, 100);
}

TEST(PointD, SiUnitsKilometreLayout) {
  const double c = kSpeedOfLight;
  const auto d = find_point_d(Event{0, 0, 0}, Event{0, 1e4, 0}, Event{0, 2e4, 0}, c);
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->advantage, 1e4 / c, 1e-15);
  EXPECT_TRUE(in_future_lightcone(Event{0, 1e4, 0}, d->d, c));
  EXPECT_TRUE(in_future_lightcone(Event{0, 2e4, 0}, d->d, c));
  EXPECT_FALSE(in_future_lightcone(Event{0, 0, 0}, d->d, c));
}
