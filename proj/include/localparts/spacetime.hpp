#pragma once

// Flat 2+1 dimensional spacetime: events, x-axis boosts, lightcone
// predicates and the timing criteria that decide whether a pair of
// measuring devices keeps its nonlocal coordination.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace localparts {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// A point in spacetime. Time in seconds, positions in meters (or any
/// consistent unit pair when working with c = 1).
struct Event {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(t) && std::isfinite(x) && std::isfinite(y); }
  friend bool operator==(const Event&, const Event&) = default;
};

inline double spatial_distance(const Event& a, const Event& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

/// Pure boost along the x axis with velocity beta = v/c.
class Boost {
 public:
  Boost() = default;
  explicit Boost(double beta) : beta_(beta) {
    if (!std::isfinite(beta) || std::abs(beta) >= 1.0)
      throw std::invalid_argument("boost requires |beta| < 1, got " + std::to_string(beta));
  }

  double beta() const { return beta_; }
  double gamma() const { return 1.0 / std::sqrt((1.0 - beta_) * (1.0 + beta_)); }

 private:
  double beta_ = 0.0;
};

/// Coordinates of `e` in the frame moving with velocity beta*c along +x.
inline Event lorentz_boost(const Event& e, const Boost& b, double c = kSpeedOfLight) {
  const double g = b.gamma();
  const double beta = b.beta();
  return Event{g * (e.t - beta * e.x / c), g * (e.x - beta * c * e.t), e.y};
}

/// Squared interval c^2 dt^2 - dx^2 - dy^2 (positive for timelike separation).
inline double interval_squared(const Event& e1, const Event& e2, double c = kSpeedOfLight) {
  const double ct = c * (e2.t - e1.t);
  const double dx = e2.x - e1.x;
  const double dy = e2.y - e1.y;
  return ct * ct - dx * dx - dy * dy;
}

enum class IntervalClass { timelike, lightlike, spacelike };

inline const char* to_string(IntervalClass k) {
  switch (k) {
    case IntervalClass::timelike: return "timelike";
    case IntervalClass::lightlike: return "lightlike";
    case IntervalClass::spacelike: return "spacelike";
  }
  return "?";
}

/// Absolute tolerance on the squared interval for the lightlike band.
inline constexpr double kLightlikeTolerance = 1e-9;

inline IntervalClass interval_classify(const Event& e1, const Event& e2, double c = kSpeedOfLight,
                                       double tolerance = kLightlikeTolerance) {
  const double s2 = interval_squared(e1, e2, c);
  if (std::abs(s2) <= tolerance) return IntervalClass::lightlike;
  return s2 > 0.0 ? IntervalClass::timelike : IntervalClass::spacelike;
}

/// True when `target` is strictly later than `source` and causally reachable
/// from it (inside or on the future cone).
inline bool in_future_lightcone(const Event& source, const Event& target, double c = kSpeedOfLight,
                                double tolerance = kLightlikeTolerance) {
  return target.t > source.t &&
         interval_classify(source, target, c, tolerance) != IntervalClass::spacelike;
}

/// Separation L, arrival-time offset |dt|, device recession speed v_bb and
/// hidden-influence speed v of a two-device experiment.
struct TimingScenario {
  double L = 0.0;
  double dt = 0.0;
  double v_bb = 0.0;
  double v = 0.0;
  double c = kSpeedOfLight;

  void validate() const {
    if (!(std::isfinite(L) && L > 0.0)) throw std::invalid_argument("timing: L must be > 0");
    if (!(std::isfinite(dt) && dt >= 0.0)) throw std::invalid_argument("timing: dt must be >= 0");
    if (!(std::isfinite(c) && c > 0.0)) throw std::invalid_argument("timing: c must be > 0");
    if (!(std::isfinite(v_bb) && v_bb >= 0.0 && v_bb < c))
      throw std::invalid_argument("timing: v_bb must satisfy 0 <= v_bb < c");
    if (!(std::isfinite(v) && v > 0.0)) throw std::invalid_argument("timing: v must be > 0");
  }
};

/// Each device, in its own rest frame, chooses before the partner photon
/// arrives: |dt| < (v_bb / c^2) L. Ties keep coordination on.
inline bool before_before(const TimingScenario& s) {
  s.validate();
  return s.dt < (s.v_bb / (s.c * s.c)) * s.L;
}

/// A finite-speed influence cannot bridge the pair in time: L > v |dt|.
inline bool finite_speed_cut(const TimingScenario& s) {
  s.validate();
  return s.L > s.v * s.dt;
}

/// The recession speed whose before-before window equals the reach of an
/// influence travelling at v: c^2 / v.
inline double equivalent_vbb(double v, double c = kSpeedOfLight) {
  if (!(std::isfinite(v) && v > 0.0)) throw std::invalid_argument("equivalent_vbb: v must be > 0");
  return (c / v) * c;
}

enum class TemporalOrder { before, after, simultaneous };

inline const char* to_string(TemporalOrder o) {
  switch (o) {
    case TemporalOrder::before: return "before";
    case TemporalOrder::after: return "after";
    case TemporalOrder::simultaneous: return "simultaneous";
  }
  return "?";
}

/// Order of `local` relative to `remote` as seen in the rest frame of a
/// device moving with `device_boost`. `tolerance` is in seconds; the
/// default corresponds to 1e-9 length units.
inline TemporalOrder device_frame_order(const Event& local, const Event& remote,
                                        const Boost& device_boost, double c = kSpeedOfLight,
                                        std::optional<double> tolerance = std::nullopt) {
  const double tol = tolerance.value_or(kLightlikeTolerance / c);
  const double tl = lorentz_boost(local, device_boost, c).t;
  const double tr = lorentz_boost(remote, device_boost, c).t;
  if (std::abs(tl - tr) <= tol) return TemporalOrder::simultaneous;
  return tl < tr ? TemporalOrder::before : TemporalOrder::after;
}

struct PointD {
  Event d;
  double advantage = 0.0;  // time units of the input events
};

namespace detail {

// Earliest time at which a signal from both b and c can be at (x, y).
inline double joint_arrival(const Event& b, const Event& c_ev, double x, double y, double c) {
  const double tb = b.t + std::hypot(x - b.x, y - b.y) / c;
  const double tc = c_ev.t + std::hypot(x - c_ev.x, y - c_ev.y) / c;
  return std::max(tb, tc);
}

inline double light_from(const Event& a, double x, double y, double c) {
  return a.t + std::hypot(x - a.x, y - a.y) / c;
}

}  // namespace detail

/// Finds a spacetime point D reachable by light from both B and C but not
/// from A, and the head start D enjoys over any light signal from A.
///
/// The candidate is first the midpoint of the B-C segment (on their
/// perpendicular bisector) at the earliest time both cones contain it. If
/// that fails, a grid over a square of half-side 10x the largest pairwise
/// distance is scanned. Returns nullopt when no candidate beats A's light.
inline std::optional<PointD> find_point_d(const Event& a, const Event& b, const Event& c_ev,
                                          double c = kSpeedOfLight) {
  if (!a.finite() || !b.finite() || !c_ev.finite())
    throw std::invalid_argument("find_point_d: events must be finite");
  const double min_advantage = kLightlikeTolerance / c;
  const double scale =
      std::max({spatial_distance(a, b), spatial_distance(a, c_ev), spatial_distance(b, c_ev),
                c * std::abs(a.t - b.t), c * std::abs(a.t - c_ev.t), c * std::abs(b.t - c_ev.t)});

  auto make = [&](double x, double y) -> std::optional<PointD> {
    Event d{detail::joint_arrival(b, c_ev, x, y, c), x, y};
    // D on top of the later of B and C: slide away from A, which keeps the
    // head start unchanged while putting D strictly in that event's future.
    const double latest = std::max(b.t, c_ev.t);
    if (!(d.t > latest)) {
      double ux = x - a.x;
      double uy = y - a.y;
      double n = std::hypot(ux, uy);
      if (n == 0.0) return std::nullopt;
      const double step = scale > 0.0 ? 0.5 * scale : 1.0;
      x += step * ux / n;
      y += step * uy / n;
      d = Event{detail::joint_arrival(b, c_ev, x, y, c), x, y};
    }
    PointD out{d, detail::light_from(a, d.x, d.y, c) - d.t};
    if (!(out.advantage > min_advantage)) return std::nullopt;
    // Exact cone-boundary placement can fall a rounding error outside; nudge
    // D later by a negligible fraction of the head start if needed.
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (in_future_lightcone(b, out.d, c) && in_future_lightcone(c_ev, out.d, c) &&
          !in_future_lightcone(a, out.d, c))
        return out;
      const double nudge = out.advantage * std::ldexp(1.0, -40 + 4 * attempt);
      out.d.t += nudge;
      out.advantage -= nudge;
    }
    return std::nullopt;
  };

  const double mx = 0.5 * (b.x + c_ev.x);
  const double my = 0.5 * (b.y + c_ev.y);
  if (auto p = make(mx, my)) return p;

  const double cx = (a.x + b.x + c_ev.x) / 3.0;
  const double cy = (a.y + b.y + c_ev.y) / 3.0;
  const double half = 10.0 * (scale > 0.0 ? scale : 1.0);
  constexpr int kGrid = 200;
  double best = -std::numeric_limits<double>::infinity();
  double bx = cx, by = cy;
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j <= kGrid; ++j) {
      const double x = cx - half + 2.0 * half * i / kGrid;
      const double y = cy - half + 2.0 * half * j / kGrid;
      const double adv = detail::light_from(a, x, y, c) - detail::joint_arrival(b, c_ev, x, y, c);
      if (adv > best) {
        best = adv;
        bx = x;
        by = y;
      }
    }
  }
  if (!(best > min_advantage)) return std::nullopt;
  return make(bx, by);
}

}  // namespace localparts
