#pragma once

// Bell expressions on bipartite behaviors: CHSH, the N-setting chained
// (Braunstein-Caves) expression in correlator form, local bounds by
// enumeration of deterministic strategies, the singlet optimum by
// multi-start coordinate ascent, and local-weight mixtures.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "localparts/behavior.hpp"
#include "localparts/quantum.hpp"

namespace localparts {

/// One correlator term sign * E(a_alice, b_bob).
struct ChainTerm {
  int alice = 0;
  int bob = 0;
  int sign = 1;
};

/// E(a1,b1) + E(a2,b1) + E(a2,b2) + ... + E(aN,bN) - E(a1,bN), i.e. the
/// chain a1-b1-a2-b2-...-aN-bN closed by one negative link back to a1.
class ChainSpec {
 public:
  explicit ChainSpec(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("chain: N must be >= 2");
    for (int i = 0; i < n; ++i) {
      terms_.push_back({i, i, +1});
      if (i + 1 < n) terms_.push_back({i + 1, i, +1});
    }
    terms_.push_back({0, n - 1, -1});
  }

  int n() const { return n_; }
  const std::vector<ChainTerm>& terms() const { return terms_; }

 private:
  int n_;
  std::vector<ChainTerm> terms_;
};

namespace detail {
inline void require_bipartite(const Behavior& b, const char* who) {
  if (b.parties() != 2) throw std::invalid_argument(std::string(who) + ": behavior must be bipartite");
}
}  // namespace detail

/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b').
inline double chsh_value(const Behavior& bh, int a, int a2, int b, int b2) {
  detail::require_bipartite(bh, "chsh_value");
  return correlator(bh, {a, b}) + correlator(bh, {a, b2}) + correlator(bh, {a2, b}) -
         correlator(bh, {a2, b2});
}

inline double chain_value(const Behavior& bh, const ChainSpec& spec) {
  detail::require_bipartite(bh, "chain_value");
  const auto& m = bh.settings_per_party();
  if (m[0] < spec.n() || m[1] < spec.n())
    throw std::invalid_argument("chain_value: behavior has fewer than N settings per party");
  double v = 0.0;
  for (const ChainTerm& t : spec.terms()) v += t.sign * correlator(bh, {t.alice, t.bob});
  return v;
}

struct LocalBound {
  double value = 0.0;
  std::vector<int> alice;  // +/-1 per setting
  std::vector<int> bob;
};

inline constexpr int kMaxEnumeratedChain = 16;

/// Maximum of the chain expression over deterministic local strategies.
///
/// All 2^N Alice assignments are enumerated; for each, Bob's best response
/// is exact per setting (his terms decouple), which equals enumerating all
/// 2^N x 2^N pairs. Ties resolve to the lexicographically first strategy
/// (bit 0 = +1, party 0's setting 0 most significant).
inline LocalBound local_bound(const ChainSpec& spec) {
  const int n = spec.n();
  if (n > kMaxEnumeratedChain)
    throw std::domain_error("local_bound: N too large for enumeration");
  LocalBound best;
  best.value = -INFINITY;
  std::vector<int> alice(n), bob(n);
  std::vector<double> coeff(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (int i = 0; i < n; ++i) alice[i] = ((mask >> (n - 1 - i)) & 1u) ? -1 : 1;
    std::fill(coeff.begin(), coeff.end(), 0.0);
    for (const ChainTerm& t : spec.terms()) coeff[t.bob] += t.sign * alice[t.alice];
    double v = 0.0;
    for (int j = 0; j < n; ++j) {
      bob[j] = coeff[j] >= 0.0 ? 1 : -1;  // +1 first on ties
      v += std::abs(coeff[j]);
    }
    if (v > best.value) {
      best.value = v;
      best.alice = alice;
      best.bob = bob;
    }
  }
  return best;
}

struct ChainOptimum {
  double value = 0.0;
  std::vector<double> alice_angles;
  std::vector<double> bob_angles;
};

struct AscentOptions {
  int starts = 32;
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed5eedULL;
  int max_sweeps = 100000;
};

namespace detail {

// Objective along one angle is C + A cos(theta) + B sin(theta) exactly,
// because each measured observable is linear in (cos theta, sin theta).
template <class F>
double argmax_sinusoid(F&& f) {
  const double f0 = f(0.0);
  const double fpi = f(std::numbers::pi);
  const double fh = f(0.5 * std::numbers::pi);
  const double a = 0.5 * (f0 - fpi);
  const double c = 0.5 * (f0 + fpi);
  const double b = fh - c;
  return std::atan2(b, a);
}

}  // namespace detail

/// Chain value of `state` measured at the given angles, evaluated term by
/// term (no full behavior table needed).
inline double chain_value_quantum(const StateVector& state, const ChainSpec& spec,
                                  const std::vector<double>& alice, const std::vector<double>& bob) {
  double v = 0.0;
  for (const ChainTerm& t : spec.terms())
    v += t.sign * quantum_correlator(state, {alice[static_cast<std::size_t>(t.alice)],
                                             bob[static_cast<std::size_t>(t.bob)]});
  return v;
}

/// Maximizes the singlet chain value over all 2N angles by multi-start
/// coordinate ascent (closed-form maximization along each coordinate).
inline ChainOptimum quantum_chain_optimum(int n, const AscentOptions& opt = {}) {
  if (n < 2 || n > 12) throw std::invalid_argument("quantum_chain_optimum: N must be in [2, 12]");
  const ChainSpec spec(n);
  const StateVector singlet = make_singlet();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  ChainOptimum best;
  best.value = -INFINITY;
  for (int start = 0; start < opt.starts; ++start) {
    std::vector<double> al(n), bo(n);
    for (auto& v : al) v = angle(rng);
    for (auto& v : bo) v = angle(rng);
    double current = chain_value_quantum(singlet, spec, al, bo);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      for (int k = 0; k < 2 * n; ++k) {
        double& theta = k < n ? al[k] : bo[k - n];
        theta = detail::argmax_sinusoid([&](double t) {
          const double keep = theta;
          theta = t;
          const double v = chain_value_quantum(singlet, spec, al, bo);
          theta = keep;
          return v;
        });
      }
      const double next = chain_value_quantum(singlet, spec, al, bo);
      const bool done = next - current < opt.tolerance;
      current = std::max(current, next);
      if (done) break;
    }
    if (current > best.value) {
      best.value = current;
      best.alice_angles = al;
      best.bob_angles = bo;
    }
  }
  // Report the value the returned angles actually produce.
  best.value = chain_value_quantum(singlet, spec, best.alice_angles, best.bob_angles);
  return best;
}

/// Closed-form angles: chain order a1, b1, a2, ... spaced by pi/(2N), Bob
/// rotated by pi to turn singlet anticorrelation into correlation.
inline ChainOptimum equally_spaced_chain_angles(int n) {
  ChainOptimum out;
  const double step = std::numbers::pi / (2.0 * n);
  for (int i = 0; i < n; ++i) {
    out.alice_angles.push_back(2.0 * i * step);
    out.bob_angles.push_back((2.0 * i + 1.0) * step + std::numbers::pi);
  }
  out.value = chain_value_quantum(make_singlet(), ChainSpec(n), out.alice_angles, out.bob_angles);
  return out;
}

/// Weight p of local parts in a local/quantum mixture.
struct MixtureSpec {
  double p = 0.0;

  explicit MixtureSpec(double weight) : p(weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("mixture: p must be in [0, 1]");
  }
};

/// Chain values used by the mixture analysis: Q_N (singlet optimum) and
/// L_N (enumerated local bound).
struct ChainValues {
  int n = 0;
  double quantum = 0.0;
  double local = 0.0;
};

inline ChainValues chain_values(int n) {
  return {n, quantum_chain_optimum(n).value, local_bound(ChainSpec(n)).value};
}

/// (1-p) Q_N + p L_N: the largest chain value a mixture can reach when its
/// local part saturates the local bound.
inline double mixture_max_value(const MixtureSpec& m, const ChainValues& v) {
  return (1.0 - m.p) * v.quantum + m.p * v.local;
}
inline double mixture_max_value(const MixtureSpec& m, int n) { return mixture_max_value(m, chain_values(n)); }

/// Q_N - mixture_max_value = p (Q_N - L_N).
inline double mixture_deviation(const MixtureSpec& m, const ChainValues& v) {
  return m.p * (v.quantum - v.local);
}
inline double mixture_deviation(const MixtureSpec& m, int n) { return mixture_deviation(m, chain_values(n)); }

struct ThresholdResult {
  std::optional<int> n;
  std::vector<ChainValues> values;   // N = 2..12
  std::vector<double> deviations;    // matches `values`
};

inline constexpr int kThresholdMaxN = 12;

/// Smallest N <= 12 at which a mixture with local weight p falls short of
/// the quantum chain value by at least epsilon. The whole deviation sequence
/// is returned so its shape can be inspected.
inline ThresholdResult detection_threshold_N(double p, double epsilon,
                                             const std::vector<ChainValues>* precomputed = nullptr) {
  const MixtureSpec m(p);
  if (!(epsilon > 0.0)) throw std::invalid_argument("detection_threshold_N: epsilon must be > 0");
  ThresholdResult out;
  for (int n = 2; n <= kThresholdMaxN; ++n) {
    ChainValues v = precomputed ? precomputed->at(static_cast<std::size_t>(n - 2)) : chain_values(n);
    const double dev = mixture_deviation(m, v);
    out.values.push_back(v);
    out.deviations.push_back(dev);
    if (!out.n && dev >= epsilon) out.n = n;
  }
  return out;
}

}  // namespace localparts
