#pragma once

// Hidden-influence models with local parts. A model looks at the device
// geometry, decides which pairs of devices keep their nonlocal coordination,
// turns a target (quantum) behavior into the behavior it actually predicts,
// and samples outcome records from it.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "localparts/behavior.hpp"
#include "localparts/spacetime.hpp"

namespace localparts {

/// Device layout: arrival event and rest-frame boost of each device.
struct Geometry {
  std::vector<Event> devices;
  std::vector<Boost> boosts;
  std::optional<double> critical_distance;  // informational, d < L < BC
  double c = kSpeedOfLight;

  int parties() const { return static_cast<int>(devices.size()); }

  void validate() const {
    if (devices.empty() || devices.size() > static_cast<std::size_t>(kMaxParties))
      throw std::invalid_argument("geometry: 1..4 devices required");
    if (boosts.size() != devices.size())
      throw std::invalid_argument("geometry: one boost per device required");
    for (const Event& e : devices)
      if (!e.finite()) throw std::invalid_argument("geometry: device events must be finite");
    for (std::size_t i = 0; i < devices.size(); ++i)
      for (std::size_t j = i + 1; j < devices.size(); ++j)
        if (!(spatial_distance(devices[i], devices[j]) > 0.0))
          throw std::invalid_argument("geometry: devices must be spatially separated");
  }
};

/// Unordered device pairs in the order (0,1), (0,2), ..., (1,2), ...
inline std::vector<std::pair<int, int>> device_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

inline std::string pair_name(int i, int j) {
  return std::string{static_cast<char>('a' + i), static_cast<char>('a' + j)};
}

enum class ModelKind { quantum, local, finite_speed, multisim, mixture };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::quantum: return "quantum";
    case ModelKind::local: return "local";
    case ModelKind::finite_speed: return "finite_speed";
    case ModelKind::multisim: return "multisim";
    case ModelKind::mixture: return "mixture";
  }
  return "?";
}

enum class SwitchSchedule { independent, blocks };

/// Deterministic per-party answers (+1/-1 per setting) used as the local
/// part instead of the product-of-marginals surrogate.
using DeterministicStrategy = std::vector<std::vector<int>>;

struct ModelConfig {
  ModelKind kind = ModelKind::quantum;
  double v = 0.0;  // finite_speed, m/s in the lab frame
  double p = 0.0;  // mixture: probability that a trial is local
  SwitchSchedule schedule = SwitchSchedule::independent;
  int block = 1;  // block length for SwitchSchedule::blocks
  std::optional<DeterministicStrategy> local_strategy;

  void validate() const {
    if (kind == ModelKind::finite_speed && !(std::isfinite(v) && v > 0.0))
      throw std::invalid_argument("model: finite_speed requires v > 0");
    if (kind == ModelKind::mixture && !(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("model: mixture requires p in [0, 1]");
    if (schedule == SwitchSchedule::blocks && block < 1)
      throw std::invalid_argument("model: block length must be >= 1");
  }
};

/// ON/OFF per device pair, in `device_pairs` order.
struct CoordinationMap {
  int parties = 0;
  std::vector<bool> on;

  static CoordinationMap all(int n, bool value) {
    return {n, std::vector<bool>(device_pairs(n).size(), value)};
  }
  bool is_on(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto pairs = device_pairs(parties);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (pairs[k] == std::make_pair(i, j)) return on[k];
    throw std::out_of_range("coordination: pair out of range");
  }
  bool all_on() const { return std::all_of(on.begin(), on.end(), [](bool b) { return b; }); }
  bool all_off() const { return std::none_of(on.begin(), on.end(), [](bool b) { return b; }); }
  std::uint8_t mask() const {
    std::uint8_t m = 0;
    for (std::size_t k = 0; k < on.size(); ++k)
      if (on[k]) m = static_cast<std::uint8_t>(m | (1u << k));
    return m;
  }
  friend bool operator==(const CoordinationMap&, const CoordinationMap&) = default;
};

/// Speed at which device i moves away from device j along their
/// separation (boosts act along x only); negative when approaching.
inline double outward_speed(const Geometry& g, int i, int j) {
  const Event& di = g.devices[static_cast<std::size_t>(i)];
  const Event& dj = g.devices[static_cast<std::size_t>(j)];
  const double dist = spatial_distance(di, dj);
  return g.boosts[static_cast<std::size_t>(i)].beta() * g.c * (di.x - dj.x) / dist;
}

/// Per-pair timing inputs: L = device distance, dt = arrival offset,
/// v_bb = the slower of the two outward speeds (clamped at 0), v as given.
inline TimingScenario pair_scenario(const Geometry& g, int i, int j, double v) {
  TimingScenario s;
  s.c = g.c;
  s.L = spatial_distance(g.devices[static_cast<std::size_t>(i)], g.devices[static_cast<std::size_t>(j)]);
  s.dt = std::abs(g.devices[static_cast<std::size_t>(i)].t - g.devices[static_cast<std::size_t>(j)].t);
  s.v_bb = std::max(0.0, std::min(outward_speed(g, i, j), outward_speed(g, j, i)));
  s.v = v > 0.0 ? v : g.c;
  return s;
}

/// Which device pairs keep their nonlocal coordination. Mixtures report
/// the map of their quantum branch; `sample_runs` switches per trial.
inline CoordinationMap coordination_map(const ModelConfig& model, const Geometry& g) {
  model.validate();
  g.validate();
  const int n = g.parties();
  switch (model.kind) {
    case ModelKind::quantum:
    case ModelKind::mixture: return CoordinationMap::all(n, true);
    case ModelKind::local: return CoordinationMap::all(n, false);
    case ModelKind::finite_speed:
    case ModelKind::multisim: break;
  }
  CoordinationMap map = CoordinationMap::all(n, true);
  const auto pairs = device_pairs(n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const TimingScenario s = pair_scenario(g, i, j, model.v);
    map.on[k] = model.kind == ModelKind::finite_speed ? !finite_speed_cut(s) : !before_before(s);
  }
  return map;
}

class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Behavior single_marginal(const Behavior& b, int party) {
  if (b.parties() == 1) return b;
  return averaged_marginal(b, {party});
}

inline Behavior product_of_marginals(const Behavior& target) {
  std::vector<Behavior> singles;
  for (int k = 0; k < target.parties(); ++k) singles.push_back(single_marginal(target, k));
  return product_behavior(singles);
}

// Q = P_hub,i * P(j | hub): exact hub-i and hub-j marginals, while i and j
// are linked only through the hub's outcome (local for every hub setting).
inline Behavior hub_construction(const Behavior& target, int hub, int i, int j) {
  const Behavior p_hi = averaged_marginal(target, {hub, i});
  const Behavior p_hj = averaged_marginal(target, {hub, j});
  const bool hub_first_i = hub < i;
  const bool hub_first_j = hub < j;
  Behavior out(target.settings_per_party());
  for (std::size_t s = 0; s < out.num_setting_tuples(); ++s) {
    const std::vector<int> t = out.setting_tuple(s);
    const std::vector<int> si = hub_first_i ? std::vector<int>{t[hub], t[i]} : std::vector<int>{t[i], t[hub]};
    const std::vector<int> sj = hub_first_j ? std::vector<int>{t[hub], t[j]} : std::vector<int>{t[j], t[hub]};
    const std::size_t idx_i = p_hi.setting_index(si);
    const std::size_t idx_j = p_hj.setting_index(sj);
    auto pair_outcome = [](bool hub_first, int oh, int other) {
      return static_cast<std::size_t>(hub_first ? (oh << 1) | other : (other << 1) | oh);
    };
    for (std::size_t o = 0; o < out.num_outcomes(); ++o) {
      const int oh = out.outcome_bit_of(o, hub);
      const int oi = out.outcome_bit_of(o, i);
      const int oj = out.outcome_bit_of(o, j);
      const double hub_j = p_hj.at(idx_j, pair_outcome(hub_first_j, oh, 0)) +
                           p_hj.at(idx_j, pair_outcome(hub_first_j, oh, 1));
      const double joint = p_hi.at(idx_i, pair_outcome(hub_first_i, oh, oi));
      out.at(s, o) = hub_j > 0.0 ? joint * p_hj.at(idx_j, pair_outcome(hub_first_j, oh, oj)) / hub_j : 0.0;
    }
  }
  return out;
}

// Q = P_ki x P_j for an isolated party j.
inline Behavior pair_times_single(const Behavior& target, int k, int i, int j) {
  const Behavior pair = averaged_marginal(target, {k, i});
  const Behavior single = single_marginal(target, j);
  const int lo = std::min(k, i);
  const int hi = std::max(k, i);
  Behavior out(target.settings_per_party());
  for (std::size_t s = 0; s < out.num_setting_tuples(); ++s) {
    const std::vector<int> t = out.setting_tuple(s);
    const std::size_t ps = pair.setting_index(std::vector<int>{t[lo], t[hi]});
    for (std::size_t o = 0; o < out.num_outcomes(); ++o) {
      const std::size_t po =
          static_cast<std::size_t>((out.outcome_bit_of(o, lo) << 1) | out.outcome_bit_of(o, hi));
      out.at(s, o) = pair.at(ps, po) *
                     single.at(static_cast<std::size_t>(t[j]), static_cast<std::size_t>(out.outcome_bit_of(o, j)));
    }
  }
  return out;
}

inline Behavior mix(const Behavior& a, const Behavior& b, double weight_b) {
  std::vector<double> t(a.table().size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = (1.0 - weight_b) * a.table()[k] + weight_b * b.table()[k];
  return Behavior(a.settings_per_party(), std::move(t));
}

}  // namespace detail

/// The local behavior a model uses when every pair is OFF: the declared
/// deterministic strategy if present, else the product of the target's
/// single-party marginals.
inline Behavior local_part(const ModelConfig& model, const Behavior& target) {
  if (!model.local_strategy) return detail::product_of_marginals(target);
  const DeterministicStrategy& st = *model.local_strategy;
  if (static_cast<int>(st.size()) != target.parties())
    throw std::invalid_argument("model: local strategy must list every party");
  std::vector<Behavior> singles;
  for (int k = 0; k < target.parties(); ++k) {
    const auto& answers = st[static_cast<std::size_t>(k)];
    if (static_cast<int>(answers.size()) != target.settings_per_party()[static_cast<std::size_t>(k)])
      throw std::invalid_argument("model: local strategy needs one answer per setting");
    std::vector<double> p_plus;
    for (int a : answers) p_plus.push_back(outcome_bit(a) == 0 ? 1.0 : 0.0);
    singles.push_back(coin_behavior(p_plus));
  }
  return product_behavior(singles);
}

/// Behavior predicted under a given coordination pattern.
inline Behavior behavior_under(const CoordinationMap& map, const Behavior& target) {
  if (map.parties != target.parties())
    throw std::invalid_argument("effective_behavior: party count mismatch");
  const int n = target.parties();
  if (n == 1 || map.all_on()) return target;
  if (map.all_off()) return detail::product_of_marginals(target);
  if (n != 3)
    throw UnsupportedConfiguration("effective_behavior: mixed ON/OFF patterns are supported for 3 parties only");

  const auto pairs = device_pairs(3);
  std::vector<std::pair<int, int>> off, on;
  for (std::size_t k = 0; k < pairs.size(); ++k) (map.on[k] ? on : off).push_back(pairs[k]);
  if (off.size() == 1) {
    const auto [i, j] = off.front();
    const int hub = 3 - i - j;
    return detail::hub_construction(target, hub, i, j);
  }
  // Two pairs OFF: the remaining ON pair keeps its marginal, the third
  // party is independent.
  const auto [k, i] = on.front();
  return detail::pair_times_single(target, k, i, 3 - k - i);
}

inline Behavior effective_behavior(const ModelConfig& model, const Geometry& g, const Behavior& target) {
  target.check();
  const CoordinationMap map = coordination_map(model, g);
  if (map.parties != target.parties())
    throw std::invalid_argument("effective_behavior: geometry and behavior disagree on party count");
  switch (model.kind) {
    case ModelKind::local: return local_part(model, target);
    case ModelKind::mixture: return detail::mix(target, local_part(model, target), model.p);
    default: return behavior_under(map, target);
  }
}

// ---------------------------------------------------------------------------
// Sampling

struct RunRecord {
  std::uint64_t trial = 0;
  std::array<std::int8_t, kMaxParties> settings{};
  std::array<std::int8_t, kMaxParties> outcomes{};  // +1 / -1
  std::uint8_t coordination = 0;  // bit k set = pair k ON

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Setting tuples to draw from; empty means every tuple of the target.
struct SettingsSchedule {
  std::vector<std::vector<int>> tuples;
  bool cyclic = false;  // cycle in order instead of drawing uniformly
};

inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 16;

/// SplitMix64 finalizer; chunk j of a run seeded with `seed` uses
/// splitmix64(seed + (j + 1) * 0x9E3779B97F4A7C15) as its generator seed.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  return splitmix64(seed + (chunk + 1) * 0x9E3779B97F4A7C15ULL);
}

/// 53-bit uniform in [0, 1) from a std::mt19937_64 draw; both are fully
/// specified, so streams are portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace detail {

struct Sampler {
  Behavior behavior;
  std::vector<double> cdf;  // per setting tuple, cumulative over outcomes
  std::uint8_t coordination = 0;

  Sampler(Behavior b, std::uint8_t coord) : behavior(std::move(b)), coordination(coord) {
    const std::size_t no = behavior.num_outcomes();
    cdf.resize(behavior.table().size());
    for (std::size_t s = 0; s < behavior.num_setting_tuples(); ++s) {
      double acc = 0.0;
      for (std::size_t o = 0; o < no; ++o) {
        acc += std::max(0.0, behavior.at(s, o));
        cdf[s * no + o] = acc;
      }
      for (std::size_t o = 0; o < no; ++o) cdf[s * no + o] /= acc;
    }
  }

  std::size_t draw(std::size_t setting, double u) const {
    const std::size_t no = behavior.num_outcomes();
    const double* row = cdf.data() + setting * no;
    for (std::size_t o = 0; o + 1 < no; ++o)
      if (u < row[o]) return o;
    return no - 1;
  }
};

}  // namespace detail

struct SamplingOptions {
  unsigned workers = 1;
};

/// i.i.d. outcome records. Trials are split into chunks of 2^16 with one
/// generator per chunk, so the stream depends only on (seed, trials,
/// schedule) and never on the worker count.
inline std::vector<RunRecord> sample_runs(const ModelConfig& model, const Geometry& g, const Behavior& target,
                                          const SettingsSchedule& schedule, std::uint64_t trials,
                                          std::uint64_t seed, const SamplingOptions& opt = {}) {
  if (trials == 0) throw std::invalid_argument("sample_runs: trials must be >= 1");
  target.check();
  const CoordinationMap map = coordination_map(model, g);
  if (map.parties != target.parties())
    throw std::invalid_argument("sample_runs: geometry and behavior disagree on party count");
  const int n = target.parties();

  std::vector<std::size_t> tuples;
  if (schedule.tuples.empty()) {
    for (std::size_t s = 0; s < target.num_setting_tuples(); ++s) tuples.push_back(s);
  } else {
    for (const auto& t : schedule.tuples) tuples.push_back(target.setting_index(t));
  }

  const bool mixture = model.kind == ModelKind::mixture;
  const detail::Sampler primary(
      model.kind == ModelKind::local ? local_part(model, target) : behavior_under(map, target),
      model.kind == ModelKind::local ? CoordinationMap::all(n, false).mask() : map.mask());
  std::optional<detail::Sampler> local_branch;
  if (mixture) local_branch.emplace(local_part(model, target), CoordinationMap::all(n, false).mask());

  std::vector<RunRecord> runs(trials);
  const std::uint64_t chunks = (trials + kChunkSize - 1) / kChunkSize;

  auto run_chunk = [&](std::uint64_t chunk) {
    std::mt19937_64 rng(chunk_seed(seed, chunk));
    const std::uint64_t begin = chunk * kChunkSize;
    const std::uint64_t end = std::min(trials, begin + kChunkSize);
    for (std::uint64_t t = begin; t < end; ++t) {
      const double u_setting = uniform01(rng);
      const double u_switch = uniform01(rng);
      const double u_outcome = uniform01(rng);
      const std::size_t pick =
          schedule.cyclic ? static_cast<std::size_t>(t % tuples.size())
                          : std::min(tuples.size() - 1, static_cast<std::size_t>(u_setting * static_cast<double>(tuples.size())));
      const std::size_t setting = tuples[pick];
      bool local = false;
      if (mixture) {
        if (model.schedule == SwitchSchedule::independent) {
          local = u_switch < model.p;
        } else {
          const double b = static_cast<double>(t / static_cast<std::uint64_t>(model.block));
          local = std::floor((b + 1.0) * model.p) - std::floor(b * model.p) >= 1.0;
        }
      }
      const detail::Sampler& sm = local ? *local_branch : primary;
      const std::size_t o = sm.draw(setting, u_outcome);
      RunRecord& r = runs[t];
      r.trial = t;
      r.coordination = sm.coordination;
      const std::vector<int> st = target.setting_tuple(setting);
      for (int k = 0; k < n; ++k) {
        r.settings[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(st[static_cast<std::size_t>(k)]);
        r.outcomes[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(outcome_value(sm.behavior.outcome_bit_of(o, k)));
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Empirical statistics

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Counts per (setting tuple, outcome) gathered from run records.
class Tally {
 public:
  explicit Tally(std::vector<int> settings_per_party) : shape_(std::move(settings_per_party)) {
    counts_.assign(shape_.table().size(), 0);
  }

  void add(const std::vector<RunRecord>& runs) {
    const int n = shape_.parties();
    std::vector<int> st(static_cast<std::size_t>(n));
    for (const RunRecord& r : runs) {
      std::size_t o = 0;
      for (int k = 0; k < n; ++k) {
        st[static_cast<std::size_t>(k)] = r.settings[static_cast<std::size_t>(k)];
        o = (o << 1) | static_cast<std::size_t>(outcome_bit(r.outcomes[static_cast<std::size_t>(k)]));
      }
      ++counts_[shape_.setting_index(st) * shape_.num_outcomes() + o];
    }
  }

  std::uint64_t samples(std::size_t setting) const {
    std::uint64_t s = 0;
    for (std::size_t o = 0; o < shape_.num_outcomes(); ++o) s += counts_[setting * shape_.num_outcomes() + o];
    return s;
  }

  /// Mean of the outcome product at one setting tuple and its standard error.
  Estimate correlator(std::span<const int> settings) const {
    const std::size_t s = shape_.setting_index(settings);
    Estimate e;
    e.samples = samples(s);
    if (e.samples == 0) return e;
    double sum = 0.0;
    for (std::size_t o = 0; o < shape_.num_outcomes(); ++o) {
      const double sign = (std::popcount(static_cast<unsigned>(o)) & 1) ? -1.0 : 1.0;
      sum += sign * static_cast<double>(counts_[s * shape_.num_outcomes() + o]);
    }
    const double n = static_cast<double>(e.samples);
    e.value = sum / n;
    const double var = e.samples > 1 ? std::max(0.0, 1.0 - e.value * e.value) * n / (n - 1.0) : 1.0;
    e.std_error = std::sqrt(var / n);
    return e;
  }
  Estimate correlator(std::initializer_list<int> settings) const {
    return correlator(std::span<const int>(settings.begin(), settings.size()));
  }

  /// Empirical conditional frequencies (rows without samples stay uniform).
  Behavior frequencies() const {
    Behavior b(shape_.settings_per_party());
    const std::size_t no = shape_.num_outcomes();
    for (std::size_t s = 0; s < shape_.num_setting_tuples(); ++s) {
      const std::uint64_t total = samples(s);
      for (std::size_t o = 0; o < no; ++o)
        b.at(s, o) = total ? static_cast<double>(counts_[s * no + o]) / static_cast<double>(total)
                           : 1.0 / static_cast<double>(no);
    }
    return b;
  }

  const std::vector<int>& settings_per_party() const { return shape_.settings_per_party(); }

 private:
  Behavior shape_;
  std::vector<std::uint64_t> counts_;
};

/// Signed sum of empirical correlators; terms come from independent trials
/// so the variances add.
inline Estimate combine(const std::vector<std::pair<int, Estimate>>& signed_terms) {
  Estimate out;
  double var = 0.0;
  for (const auto& [sign, e] : signed_terms) {
    out.value += sign * e.value;
    var += e.std_error * e.std_error;
    out.samples += e.samples;
  }
  out.std_error = std::sqrt(var);
  return out;
}

/// RunRecord CSV: trial,x,y,z,a,b,c,coord_ab,coord_ac,coord_bc. Columns of
/// absent parties (and pairs involving them) are left blank.
inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs, int parties) {
  if (parties < 1 || parties > 3) throw std::invalid_argument("write_runs_csv: 1..3 parties supported");
  os << "trial,x,y,z,a,b,c,coord_ab,coord_ac,coord_bc\n";
  const auto pairs = device_pairs(parties);
  const std::array<std::pair<int, int>, 3> columns{{{0, 1}, {0, 2}, {1, 2}}};
  for (const RunRecord& r : runs) {
    os << r.trial;
    for (int k = 0; k < 3; ++k) {
      os << ',';
      if (k < parties) os << static_cast<int>(r.settings[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < 3; ++k) {
      os << ',';
      if (k < parties) os << static_cast<int>(r.outcomes[static_cast<std::size_t>(k)]);
    }
    for (const auto& col : columns) {
      os << ',';
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (pairs[k] == col) os << (((r.coordination >> k) & 1u) ? "ON" : "OFF");
    }
    os << '\n';
  }
}

}  // namespace localparts
