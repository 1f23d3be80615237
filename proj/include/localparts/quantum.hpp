#pragma once

// Dense n-qubit pure states (n <= 4) and Born-rule behaviors for projective
// spin measurements in the x-z plane.
//
// Qubit k is party k; in the amplitude index party 0 is the most significant
// bit. Measuring party k at angle theta means measuring the +/-1 observable
// cos(theta) sigma_z + sin(theta) sigma_x, so the singlet correlator is
// -cos(theta_a - theta_b).

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "localparts/behavior.hpp"

namespace localparts {

using Amplitude = std::complex<double>;

class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  StateVector() = default;

  /// Throws unless the amplitudes describe a normalized state of 1..4 qubits.
  explicit StateVector(std::vector<Amplitude> amps) : amps_(std::move(amps)) {
    const std::size_t n = amps_.size();
    if (n < 2 || n > 16 || (n & (n - 1)) != 0)
      throw std::invalid_argument("state: amplitude count must be 2^n with 1 <= n <= 4");
    qubits_ = std::countr_zero(n);
    if (!(std::abs(norm_squared() - 1.0) <= kNormTolerance))
      throw std::invalid_argument("state: amplitudes are not normalized");
  }

  /// Rescales arbitrary non-zero amplitudes to unit norm.
  static StateVector normalized(std::vector<Amplitude> amps) {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("state: zero or non-finite norm");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& a : amps) a *= inv;
    return StateVector(std::move(amps));
  }

  int qubits() const { return qubits_; }
  const std::vector<Amplitude>& amplitudes() const { return amps_; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

 private:
  std::vector<Amplitude> amps_;
  int qubits_ = 0;
};

/// (|01> - |10>) / sqrt(2).
inline StateVector make_singlet() {
  const double h = 1.0 / std::numbers::sqrt2;
  return StateVector({0.0, h, -h, 0.0});
}

/// (|000> + |111>) / sqrt(2).
inline StateVector make_ghz3() {
  std::vector<Amplitude> a(8, 0.0);
  a[0] = a[7] = 1.0 / std::numbers::sqrt2;
  return StateVector(std::move(a));
}

/// cos(alpha)|000> + sin(alpha)|111>.
inline StateVector make_weighted_ghz3(double alpha) {
  std::vector<Amplitude> a(8, 0.0);
  a[0] = std::cos(alpha);
  a[7] = std::sin(alpha);
  return StateVector::normalized(std::move(a));
}

/// |0...0>.
inline StateVector make_zero_state(int qubits) {
  std::vector<Amplitude> a(std::size_t{1} << qubits, 0.0);
  a[0] = 1.0;
  return StateVector(std::move(a));
}

namespace detail {

// Component <k|e_bit(theta)> of the eigenvector with eigenvalue +1 (bit 0)
// or -1 (bit 1) of cos(theta) Z + sin(theta) X.
inline double eigen_component(double theta, int bit, int k) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  if (bit == 0) return k == 0 ? c : s;
  return k == 0 ? -s : c;
}

// Outcome distribution (2^n entries) of measuring each qubit at `angles`.
inline void born_distribution(const StateVector& state, std::span<const double> angles,
                              std::span<double> out) {
  const int n = state.qubits();
  const std::size_t dim = std::size_t{1} << n;
  const auto& amps = state.amplitudes();
  std::array<std::array<double, 4>, 4> comp{};  // [qubit][bit * 2 + k]
  for (int q = 0; q < n; ++q)
    for (int bit = 0; bit < 2; ++bit)
      for (int k = 0; k < 2; ++k) comp[q][bit * 2 + k] = eigen_component(angles[q], bit, k);
  for (std::size_t o = 0; o < dim; ++o) {
    Amplitude overlap = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      if (amps[k] == Amplitude(0.0)) continue;
      double w = 1.0;
      for (int q = 0; q < n; ++q) {
        const int shift = n - 1 - q;
        w *= comp[q][((o >> shift) & 1u) * 2 + ((k >> shift) & 1u)];
      }
      overlap += w * amps[k];
    }
    out[o] = std::norm(overlap);
  }
}

}  // namespace detail

/// Expectation of the product of the measured observables at one angle per
/// party.
inline double quantum_correlator(const StateVector& state, std::span<const double> angles) {
  if (static_cast<int>(angles.size()) != state.qubits())
    throw std::invalid_argument("quantum_correlator: one angle per qubit required");
  std::array<double, 16> buf{};
  const std::span<double> dist(buf.data(), state.amplitudes().size());
  detail::born_distribution(state, angles, dist);
  double e = 0.0;
  for (std::size_t o = 0; o < dist.size(); ++o)
    e += ((std::popcount(static_cast<unsigned>(o)) & 1) ? -1.0 : 1.0) * dist[o];
  return e;
}

inline double quantum_correlator(const StateVector& state, std::initializer_list<double> angles) {
  return quantum_correlator(state, std::span<const double>(angles.begin(), angles.size()));
}

/// Born-rule behavior; `settings[k]` lists the measurement angles of party k.
inline Behavior born_behavior(const StateVector& state, const std::vector<std::vector<double>>& settings) {
  if (static_cast<int>(settings.size()) != state.qubits())
    throw std::invalid_argument("born_behavior: party count does not match qubit count");
  std::vector<int> counts;
  for (const auto& s : settings) {
    if (s.empty()) throw std::invalid_argument("born_behavior: every party needs >= 1 angle");
    counts.push_back(static_cast<int>(s.size()));
  }
  Behavior b(counts);
  std::vector<double> angles(settings.size());
  std::vector<double> dist(b.num_outcomes());
  for (std::size_t s = 0; s < b.num_setting_tuples(); ++s) {
    const std::vector<int> tuple = b.setting_tuple(s);
    for (std::size_t k = 0; k < settings.size(); ++k)
      angles[k] = std::remainder(settings[k][static_cast<std::size_t>(tuple[k])], 2.0 * std::numbers::pi);
    detail::born_distribution(state, angles, dist);
    for (std::size_t o = 0; o < dist.size(); ++o) b.at(s, o) = dist[o];
  }
  return b;
}

}  // namespace localparts
