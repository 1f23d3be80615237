#pragma once

// Conditional probability tables P(outcomes | settings) for n parties with
// binary +1/-1 outcomes.
//
// Layout: setting tuples are enumerated lexicographically with party 0 most
// significant; outcome tuples likewise, bit value 0 meaning +1 and 1 meaning
// -1 (so +1 sorts before -1). The table is dense, row = setting tuple.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace localparts {

inline constexpr int kMaxParties = 4;

inline int outcome_value(int bit) { return bit == 0 ? +1 : -1; }
inline int outcome_bit(int value) {
  if (value != 1 && value != -1) throw std::invalid_argument("outcome must be +1 or -1");
  return value == 1 ? 0 : 1;
}

/// Party names used in reports and CSV headers.
inline char party_letter(int party) { return static_cast<char>('A' + party); }

class Behavior {
 public:
  Behavior() = default;

  /// Zero-filled table; fill through `at` and call `check` afterwards.
  explicit Behavior(std::vector<int> settings_per_party)
      : settings_(std::move(settings_per_party)) {
    if (settings_.empty() || static_cast<int>(settings_.size()) > kMaxParties)
      throw std::invalid_argument("behavior: party count must be in [1, 4]");
    for (int m : settings_)
      if (m < 1) throw std::invalid_argument("behavior: every party needs >= 1 setting");
    tuples_ = std::accumulate(settings_.begin(), settings_.end(), std::size_t{1},
                              [](std::size_t acc, int m) { return acc * static_cast<std::size_t>(m); });
    table_.assign(tuples_ * num_outcomes(), 0.0);
  }

  Behavior(std::vector<int> settings_per_party, std::vector<double> table)
      : Behavior(std::move(settings_per_party)) {
    if (table.size() != table_.size())
      throw std::invalid_argument("behavior: table size mismatch");
    table_ = std::move(table);
  }

  int parties() const { return static_cast<int>(settings_.size()); }
  const std::vector<int>& settings_per_party() const { return settings_; }
  std::size_t num_setting_tuples() const { return tuples_; }
  std::size_t num_outcomes() const { return std::size_t{1} << settings_.size(); }
  const std::vector<double>& table() const { return table_; }

  std::size_t setting_index(std::span<const int> settings) const {
    if (settings.size() != settings_.size())
      throw std::out_of_range("behavior: setting tuple has wrong length");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < settings.size(); ++i) {
      if (settings[i] < 0 || settings[i] >= settings_[i])
        throw std::out_of_range("behavior: setting index out of range for party " +
                                std::string(1, party_letter(static_cast<int>(i))));
      idx = idx * static_cast<std::size_t>(settings_[i]) + static_cast<std::size_t>(settings[i]);
    }
    return idx;
  }

  std::vector<int> setting_tuple(std::size_t index) const {
    std::vector<int> out(settings_.size());
    for (std::size_t i = settings_.size(); i-- > 0;) {
      out[i] = static_cast<int>(index % static_cast<std::size_t>(settings_[i]));
      index /= static_cast<std::size_t>(settings_[i]);
    }
    return out;
  }

  /// Outcome bit of `party` inside the outcome index `o`.
  int outcome_bit_of(std::size_t o, int party) const {
    return static_cast<int>((o >> (parties() - 1 - party)) & 1u);
  }

  double at(std::size_t setting_idx, std::size_t outcome_idx) const {
    return table_[setting_idx * num_outcomes() + outcome_idx];
  }
  double& at(std::size_t setting_idx, std::size_t outcome_idx) {
    return table_[setting_idx * num_outcomes() + outcome_idx];
  }

  double prob(std::span<const int> outcomes, std::span<const int> settings) const {
    if (outcomes.size() != settings_.size())
      throw std::out_of_range("behavior: outcome tuple has wrong length");
    std::size_t o = 0;
    for (int v : outcomes) o = (o << 1) | static_cast<std::size_t>(outcome_bit(v));
    return at(setting_index(settings), o);
  }

  std::span<const double> distribution(std::size_t setting_idx) const {
    return {table_.data() + setting_idx * num_outcomes(), num_outcomes()};
  }

  /// Largest deviation from the probability-simplex constraints.
  double normalization_error() const {
    double worst = 0.0;
    for (std::size_t s = 0; s < tuples_; ++s) {
      double sum = 0.0;
      for (double p : distribution(s)) {
        if (!std::isfinite(p)) return INFINITY;
        worst = std::max(worst, -p);
        sum += p;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  /// Throws unless every conditional distribution is non-negative and sums
  /// to one within `tolerance`.
  void check(double tolerance = 1e-9) const {
    if (!(normalization_error() <= tolerance))
      throw std::invalid_argument("behavior: conditional distributions are not normalized");
  }

  friend bool operator==(const Behavior&, const Behavior&) = default;

 private:
  std::vector<int> settings_;
  std::size_t tuples_ = 0;
  std::vector<double> table_;
};

/// E = sum over outcomes of (product of outcomes) * P at one setting tuple.
inline double correlator(const Behavior& b, std::span<const int> settings) {
  const std::size_t s = b.setting_index(settings);
  double e = 0.0;
  for (std::size_t o = 0; o < b.num_outcomes(); ++o) {
    const int parity = std::popcount(static_cast<unsigned>(o)) & 1;
    e += (parity ? -1.0 : 1.0) * b.at(s, o);
  }
  return e;
}

inline double correlator(const Behavior& b, std::initializer_list<int> settings) {
  return correlator(b, std::span<const int>(settings.begin(), settings.size()));
}

/// Marginals over a subset of parties, one per setting tuple of the
/// complement (no averaging, so remote-setting dependence stays visible).
struct MarginalFamily {
  std::vector<int> subset;
  std::vector<int> complement;
  std::vector<int> complement_settings;  // settings per complement party
  std::vector<Behavior> members;         // indexed by complement setting tuple

  std::size_t size() const { return members.size(); }
  const Behavior& operator[](std::size_t i) const { return members[i]; }
};

inline MarginalFamily marginal(const Behavior& b, std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  const int n = b.parties();
  if (subset.empty() || static_cast<int>(subset.size()) >= n)
    throw std::invalid_argument("marginal: subset must be non-empty and proper");
  for (int p : subset)
    if (p < 0 || p >= n) throw std::invalid_argument("marginal: party index out of range");

  MarginalFamily fam;
  fam.subset = subset;
  std::vector<int> sub_settings;
  for (int p = 0; p < n; ++p) {
    if (std::find(subset.begin(), subset.end(), p) != subset.end()) {
      sub_settings.push_back(b.settings_per_party()[p]);
    } else {
      fam.complement.push_back(p);
      fam.complement_settings.push_back(b.settings_per_party()[p]);
    }
  }
  Behavior shape(fam.complement_settings);
  const std::size_t ncomp = shape.num_setting_tuples();
  fam.members.assign(ncomp, Behavior(sub_settings));

  for (std::size_t s = 0; s < b.num_setting_tuples(); ++s) {
    const std::vector<int> tuple = b.setting_tuple(s);
    std::vector<int> ct, st;
    for (int p : fam.complement) ct.push_back(tuple[p]);
    for (int p : subset) st.push_back(tuple[p]);
    Behavior& m = fam.members[shape.setting_index(ct)];
    const std::size_t ms = m.setting_index(st);
    for (std::size_t o = 0; o < b.num_outcomes(); ++o) {
      std::size_t mo = 0;
      for (int p : subset) mo = (mo << 1) | static_cast<std::size_t>(b.outcome_bit_of(o, p));
      m.at(ms, mo) += b.at(s, o);
    }
  }
  return fam;
}

/// Marginal averaged uniformly over the complement's settings. Only
/// meaningful for no-signaling behaviors, where all members coincide.
inline Behavior averaged_marginal(const Behavior& b, std::vector<int> subset) {
  const MarginalFamily fam = marginal(b, std::move(subset));
  Behavior out = fam.members.front();
  std::vector<double> acc(out.table().size(), 0.0);
  for (const Behavior& m : fam.members)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m.table()[i];
  for (double& v : acc) v /= static_cast<double>(fam.members.size());
  return Behavior(out.settings_per_party(), std::move(acc));
}

/// Behavior of independent parties: the tensor product of per-party tables.
inline Behavior product_behavior(const std::vector<Behavior>& singles) {
  std::vector<int> settings;
  for (const Behavior& s : singles) {
    if (s.parties() != 1) throw std::invalid_argument("product_behavior: factors must be single-party");
    settings.push_back(s.settings_per_party()[0]);
  }
  Behavior out(settings);
  const int n = out.parties();
  for (std::size_t s = 0; s < out.num_setting_tuples(); ++s) {
    const std::vector<int> tuple = out.setting_tuple(s);
    for (std::size_t o = 0; o < out.num_outcomes(); ++o) {
      double p = 1.0;
      for (int k = 0; k < n; ++k)
        p *= singles[k].at(static_cast<std::size_t>(tuple[k]),
                           static_cast<std::size_t>(out.outcome_bit_of(o, k)));
      out.at(s, o) = p;
    }
  }
  return out;
}

/// Single-party behavior with P(+1 | setting k) = p_plus[k].
inline Behavior coin_behavior(const std::vector<double>& p_plus) {
  Behavior out({static_cast<int>(p_plus.size())});
  for (std::size_t k = 0; k < p_plus.size(); ++k) {
    out.at(k, 0) = p_plus[k];
    out.at(k, 1) = 1.0 - p_plus[k];
  }
  out.check();
  return out;
}

}  // namespace localparts
