#pragma once

// Scenario files: JSON with a versioned `schema` field. Parsing never stops
// at the first problem; every violation is collected with the JSON pointer
// of the offending value.
//
// Units: "si" (seconds, metres, m/s) or "c" (c = 1, any consistent time and
// length unit). Speeds may be numbers or strings with a "c" suffix such as
// "1e5c", meaning multiples of the speed of light in either unit system.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "localparts/hvmodels.hpp"
#include "localparts/inequality.hpp"
#include "localparts/io.hpp"
#include "localparts/quantum.hpp"
#include "localparts/spacetime.hpp"

namespace localparts {

inline constexpr const char* kScenarioSchema = "localparts.scenario/1";

struct SchemaIssue {
  std::string path;  // JSON pointer
  std::string message;
};

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<SchemaIssue> issues)
      : std::runtime_error(summary(issues)), issues_(std::move(issues)) {}

  const std::vector<SchemaIssue>& issues() const { return issues_; }

 private:
  static std::string summary(const std::vector<SchemaIssue>& issues) {
    std::string s = "scenario has " + std::to_string(issues.size()) + " schema violation(s)";
    if (!issues.empty()) s += "; first at " + issues.front().path + ": " + issues.front().message;
    return s;
  }
  std::vector<SchemaIssue> issues_;
};

enum class Units { si, c };

enum class StateKind { singlet, ghz3, weighted_ghz3, amplitudes };

struct StateSpec {
  StateKind kind = StateKind::singlet;
  double alpha = 0.0;                  // weighted_ghz3
  std::vector<Amplitude> amplitudes;   // amplitudes

  StateVector build() const {
    switch (kind) {
      case StateKind::singlet: return make_singlet();
      case StateKind::ghz3: return make_ghz3();
      case StateKind::weighted_ghz3: return make_weighted_ghz3(alpha);
      case StateKind::amplitudes: return StateVector(amplitudes);
    }
    throw std::logic_error("unknown state kind");
  }

  int qubits() const {
    switch (kind) {
      case StateKind::singlet: return 2;
      case StateKind::ghz3:
      case StateKind::weighted_ghz3: return 3;
      case StateKind::amplitudes: return std::countr_zero(amplitudes.size());
    }
    return 0;
  }
};

struct TimingInput {
  std::optional<double> L;
  std::optional<double> dt;
  std::optional<double> v_bb;
  std::optional<double> v;
};

struct ChainInput {
  int n = 2;
  std::optional<double> epsilon;
};

struct Outputs {
  std::string csv = "runs.csv";
  std::string report = "report.json";
  std::string summary = "summary.json";
};

struct Scenario {
  std::string name;
  Units units = Units::si;
  std::optional<TimingInput> timing;
  std::optional<Geometry> geometry;
  ModelConfig model;
  std::optional<StateSpec> state;
  std::vector<std::vector<double>> settings;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  Outputs outputs;
  std::pair<int, int> off_pair{1, 2};
  std::optional<ChainInput> chain;
  Json source;  // the document as given, echoed into summaries

  double c() const { return units == Units::c ? 1.0 : kSpeedOfLight; }
};

namespace detail {

class Collector {
 public:
  void add(std::string path, std::string message) { issues_.push_back({std::move(path), std::move(message)}); }
  const std::vector<SchemaIssue>& issues() const { return issues_; }
  bool ok() const { return issues_.empty(); }

  std::optional<double> number(const Json& j, const std::string& path) {
    if (!j.is_number()) {
      add(path, "expected a number");
      return std::nullopt;
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      add(path, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::uint64_t> count(const Json& j, const std::string& path, std::uint64_t min) {
    if (!j.is_number_integer()) {
      add(path, "expected an integer");
      return std::nullopt;
    }
    if (j.is_number_unsigned()) {
      const auto v = j.get<std::uint64_t>();
      if (v < min) {
        add(path, "must be >= " + std::to_string(min));
        return std::nullopt;
      }
      return v;
    }
    const auto v = j.get<std::int64_t>();
    if (v < static_cast<std::int64_t>(min)) {
      add(path, "must be >= " + std::to_string(min));
      return std::nullopt;
    }
    return static_cast<std::uint64_t>(v);
  }

  // Number (in the scenario's speed unit) or "<k>c".
  std::optional<double> speed(const Json& j, const std::string& path, double c) {
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s.size() >= 2 && s.back() == 'c') {
        try {
          std::size_t used = 0;
          const double k = std::stod(s.substr(0, s.size() - 1), &used);
          if (used == s.size() - 1 && std::isfinite(k)) return k * c;
        } catch (const std::exception&) {
        }
      }
      add(path, "expected a number or a string like \"1e5c\"");
      return std::nullopt;
    }
    return number(j, path);
  }

 private:
  std::vector<SchemaIssue> issues_;
};

inline std::string field(const std::string& base, const std::string& key) { return base + "/" + key; }
inline std::string index(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

inline void parse_timing(const Json& j, Scenario& sc, Collector& col) {
  const std::string base = "/timing";
  if (!j.is_object()) {
    col.add(base, "expected an object");
    return;
  }
  TimingInput t;
  if (j.contains("L")) {
    t.L = col.number(j["L"], field(base, "L"));
    if (t.L && !(*t.L > 0.0)) col.add(field(base, "L"), "must be > 0");
  }
  if (j.contains("dt")) {
    t.dt = col.number(j["dt"], field(base, "dt"));
    if (t.dt && *t.dt < 0.0) col.add(field(base, "dt"), "must be >= 0");
  }
  if (j.contains("v_bb")) {
    t.v_bb = col.speed(j["v_bb"], field(base, "v_bb"), sc.c());
    if (t.v_bb && !(*t.v_bb >= 0.0 && *t.v_bb < sc.c())) col.add(field(base, "v_bb"), "must lie in [0, c)");
  }
  if (j.contains("v")) {
    t.v = col.speed(j["v"], field(base, "v"), sc.c());
    if (t.v && !(*t.v > 0.0)) col.add(field(base, "v"), "must be > 0");
  }
  sc.timing = t;
}

inline void parse_geometry(const Json& j, Scenario& sc, Collector& col) {
  const std::string base = "/geometry";
  if (!j.is_object()) {
    col.add(base, "expected an object");
    return;
  }
  Geometry g;
  g.c = sc.c();
  const std::string dpath = field(base, "devices");
  if (!j.contains("devices") || !j["devices"].is_array()) {
    col.add(dpath, "expected an array of devices");
    return;
  }
  const Json& devs = j["devices"];
  if (devs.empty() || devs.size() > static_cast<std::size_t>(kMaxParties))
    col.add(dpath, "expected 1..4 devices");
  bool ok = true;
  for (std::size_t i = 0; i < devs.size(); ++i) {
    const std::string p = index(dpath, i);
    const Json& d = devs[i];
    if (!d.is_object()) {
      col.add(p, "expected an object");
      ok = false;
      continue;
    }
    Event e;
    for (const char* key : {"t", "x", "y"}) {
      if (!d.contains(key)) continue;
      if (auto v = col.number(d[key], field(p, key))) {
        (key[0] == 't' ? e.t : key[0] == 'x' ? e.x : e.y) = *v;
      } else {
        ok = false;
      }
    }
    double beta = 0.0;
    if (d.contains("beta")) {
      if (auto v = col.number(d["beta"], field(p, "beta"))) {
        if (!(std::abs(*v) < 1.0)) {
          col.add(field(p, "beta"), "|beta| must be < 1");
          ok = false;
        } else {
          beta = *v;
        }
      } else {
        ok = false;
      }
    }
    g.devices.push_back(e);
    g.boosts.emplace_back(beta);
  }
  if (j.contains("critical_distance")) {
    if (auto v = col.number(j["critical_distance"], field(base, "critical_distance"))) g.critical_distance = *v;
  }
  if (!ok) return;
  for (std::size_t i = 0; i < g.devices.size(); ++i)
    for (std::size_t k = i + 1; k < g.devices.size(); ++k)
      if (!(spatial_distance(g.devices[i], g.devices[k]) > 0.0))
        col.add(index(dpath, k), "device coincides in space with device " + std::to_string(i));
  sc.geometry = std::move(g);
}

inline void parse_model(const Json& j, Scenario& sc, Collector& col) {
  const std::string base = "/model";
  if (!j.is_object()) {
    col.add(base, "expected an object");
    return;
  }
  ModelConfig m;
  const std::string kpath = field(base, "kind");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    col.add(kpath, "expected one of quantum, local, finite_speed, multisim, mixture");
  } else {
    const std::string k = j["kind"].get<std::string>();
    if (k == "quantum") m.kind = ModelKind::quantum;
    else if (k == "local") m.kind = ModelKind::local;
    else if (k == "finite_speed") m.kind = ModelKind::finite_speed;
    else if (k == "multisim") m.kind = ModelKind::multisim;
    else if (k == "mixture") m.kind = ModelKind::mixture;
    else col.add(kpath, "unknown model kind \"" + k + "\"");
  }
  if (j.contains("v")) {
    if (auto v = col.speed(j["v"], field(base, "v"), sc.c())) m.v = *v;
  }
  if (m.kind == ModelKind::finite_speed && !(m.v > 0.0)) col.add(field(base, "v"), "finite_speed requires v > 0");
  if (j.contains("p")) {
    if (auto v = col.number(j["p"], field(base, "p"))) {
      if (!(*v >= 0.0 && *v <= 1.0)) col.add(field(base, "p"), "must lie in [0, 1]");
      else m.p = *v;
    }
  }
  if (j.contains("schedule")) {
    const Json& s = j["schedule"];
    if (s == "independent") m.schedule = SwitchSchedule::independent;
    else if (s == "blocks") m.schedule = SwitchSchedule::blocks;
    else col.add(field(base, "schedule"), "expected \"independent\" or \"blocks\"");
  }
  if (j.contains("block")) {
    if (auto v = col.count(j["block"], field(base, "block"), 1)) m.block = static_cast<int>(*v);
  }
  if (j.contains("local_strategy")) {
    const std::string lpath = field(base, "local_strategy");
    const Json& ls = j["local_strategy"];
    DeterministicStrategy st;
    bool ok = ls.is_array();
    if (!ok) col.add(lpath, "expected an array of per-party answer lists");
    for (std::size_t k = 0; ok && k < ls.size(); ++k) {
      std::vector<int> answers;
      if (!ls[k].is_array()) {
        col.add(index(lpath, k), "expected an array of +1/-1 answers");
        ok = false;
        break;
      }
      for (std::size_t s = 0; s < ls[k].size(); ++s) {
        const Json& a = ls[k][s];
        if (!a.is_number_integer() || (a.get<int>() != 1 && a.get<int>() != -1)) {
          col.add(index(index(lpath, k), s), "answers must be +1 or -1");
          ok = false;
        } else {
          answers.push_back(a.get<int>());
        }
      }
      st.push_back(std::move(answers));
    }
    if (ok) m.local_strategy = std::move(st);
  }
  sc.model = std::move(m);
}

inline void parse_state(const Json& j, Scenario& sc, Collector& col) {
  const std::string base = "/state";
  StateSpec st;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "singlet") st.kind = StateKind::singlet;
    else if (s == "ghz3") st.kind = StateKind::ghz3;
    else {
      col.add(base, "unknown state \"" + s + "\"");
      return;
    }
  } else if (j.is_object() && j.contains("weighted_ghz3")) {
    auto a = col.number(j["weighted_ghz3"], field(base, "weighted_ghz3"));
    if (!a) return;
    st.kind = StateKind::weighted_ghz3;
    st.alpha = *a;
  } else if (j.is_object() && j.contains("amplitudes")) {
    const std::string apath = field(base, "amplitudes");
    const Json& amps = j["amplitudes"];
    if (!amps.is_array()) {
      col.add(apath, "expected an array of [re, im] pairs or numbers");
      return;
    }
    const std::size_t n = amps.size();
    if (n < 2 || n > 16 || (n & (n - 1)) != 0) {
      col.add(apath, "amplitude count must be 2^n with 1 <= n <= 4");
      return;
    }
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      const Json& a = amps[k];
      if (a.is_number()) {
        st.amplitudes.emplace_back(a.get<double>(), 0.0);
      } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
        st.amplitudes.emplace_back(a[0].get<double>(), a[1].get<double>());
      } else {
        col.add(index(apath, k), "expected a number or [re, im]");
        ok = false;
      }
    }
    if (!ok) return;
    double norm = 0.0;
    for (const auto& a : st.amplitudes) norm += std::norm(a);
    if (!(std::abs(norm - 1.0) <= StateVector::kNormTolerance)) {
      col.add(apath, "amplitudes are not normalized (sum |a|^2 = " + std::to_string(norm) + ")");
      return;
    }
    st.kind = StateKind::amplitudes;
  } else {
    col.add(base, "expected \"singlet\", \"ghz3\", {\"weighted_ghz3\": alpha} or {\"amplitudes\": [...]}");
    return;
  }
  sc.state = std::move(st);
}

inline void parse_settings(const Json& j, Scenario& sc, Collector& col) {
  const std::string base = "/settings";
  if (!j.is_array() || j.empty()) {
    col.add(base, "expected a non-empty array of angle lists, one per party");
    return;
  }
  std::vector<std::vector<double>> out;
  bool ok = true;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = index(base, k);
    if (!j[k].is_array() || j[k].empty()) {
      col.add(p, "expected a non-empty array of angles (radians)");
      ok = false;
      continue;
    }
    std::vector<double> angles;
    for (std::size_t s = 0; s < j[k].size(); ++s) {
      if (auto v = col.number(j[k][s], index(p, s))) angles.push_back(*v);
      else ok = false;
    }
    out.push_back(std::move(angles));
  }
  if (ok) sc.settings = std::move(out);
}

inline int party_from_letter(const Json& j) {
  if (!j.is_string() || j.get<std::string>().size() != 1) return -1;
  const char ch = j.get<std::string>()[0];
  if (ch >= 'a' && ch <= 'c') return ch - 'a';
  if (ch >= 'A' && ch <= 'C') return ch - 'A';
  return -1;
}

}  // namespace detail

/// Parses and validates a scenario document. `force_c_units` applies when
/// the document does not declare its units itself.
inline Scenario parse_scenario(const Json& doc, bool force_c_units = false) {
  detail::Collector col;
  Scenario sc;
  sc.source = doc;
  if (!doc.is_object()) {
    col.add("", "scenario must be a JSON object");
    throw SchemaError(col.issues());
  }

  if (!doc.contains("schema")) {
    col.add("/schema", std::string("missing; expected \"") + kScenarioSchema + "\"");
  } else if (doc["schema"] != kScenarioSchema) {
    col.add("/schema", std::string("unsupported schema; expected \"") + kScenarioSchema + "\"");
  }
  if (doc.contains("name")) {
    if (doc["name"].is_string()) sc.name = doc["name"].get<std::string>();
    else col.add("/name", "expected a string");
  }
  sc.units = force_c_units ? Units::c : Units::si;
  if (doc.contains("units")) {
    if (doc["units"] == "si") sc.units = Units::si;
    else if (doc["units"] == "c") sc.units = Units::c;
    else col.add("/units", "expected \"si\" or \"c\"");
  }

  if (doc.contains("timing")) detail::parse_timing(doc["timing"], sc, col);
  if (doc.contains("geometry")) detail::parse_geometry(doc["geometry"], sc, col);
  if (doc.contains("model")) detail::parse_model(doc["model"], sc, col);
  if (doc.contains("state")) detail::parse_state(doc["state"], sc, col);
  if (doc.contains("settings")) detail::parse_settings(doc["settings"], sc, col);
  if (doc.contains("trials")) {
    if (auto v = col.count(doc["trials"], "/trials", 1)) sc.trials = *v;
  }
  if (doc.contains("seed")) {
    if (auto v = col.count(doc["seed"], "/seed", 0)) sc.seed = *v;
  }
  if (doc.contains("outputs")) {
    const Json& o = doc["outputs"];
    if (!o.is_object()) {
      col.add("/outputs", "expected an object");
    } else {
      for (const auto& [key, target] : {std::pair<const char*, std::string*>{"csv", &sc.outputs.csv},
                                        {"report", &sc.outputs.report},
                                        {"summary", &sc.outputs.summary}}) {
        if (!o.contains(key)) continue;
        const Json& v = o[key];
        if (!v.is_string() || v.get<std::string>().empty() ||
            v.get<std::string>().find('/') != std::string::npos)
          col.add(std::string("/outputs/") + key, "expected a plain file name");
        else
          *target = v.get<std::string>();
      }
    }
  }
  if (doc.contains("off_pair")) {
    const Json& op = doc["off_pair"];
    const int i = op.is_array() && op.size() == 2 ? detail::party_from_letter(op[0]) : -1;
    const int j = op.is_array() && op.size() == 2 ? detail::party_from_letter(op[1]) : -1;
    if (i < 0 || j < 0 || i == j) col.add("/off_pair", "expected two distinct party letters, e.g. [\"b\", \"c\"]");
    else sc.off_pair = {std::min(i, j), std::max(i, j)};
  }
  if (doc.contains("chain")) {
    const Json& ch = doc["chain"];
    if (!ch.is_object()) {
      col.add("/chain", "expected an object");
    } else {
      ChainInput ci;
      if (!ch.contains("n")) col.add("/chain/n", "missing");
      else if (auto v = col.count(ch["n"], "/chain/n", 2)) {
        if (*v > static_cast<std::uint64_t>(kThresholdMaxN)) col.add("/chain/n", "must be <= 12");
        else ci.n = static_cast<int>(*v);
      }
      if (ch.contains("epsilon")) {
        if (auto v = col.number(ch["epsilon"], "/chain/epsilon")) {
          if (!(*v > 0.0)) col.add("/chain/epsilon", "must be > 0");
          else ci.epsilon = *v;
        }
      }
      sc.chain = ci;
    }
  }

  // Cross-field invariants.
  const int parties = sc.geometry ? sc.geometry->parties() : -1;
  if (sc.state && parties > 0 && sc.state->qubits() != parties)
    col.add("/state", "state has " + std::to_string(sc.state->qubits()) + " qubits but geometry has " +
                          std::to_string(parties) + " devices");
  if (sc.state && !sc.settings.empty() && static_cast<int>(sc.settings.size()) != sc.state->qubits())
    col.add("/settings", "expected one angle list per qubit (" + std::to_string(sc.state->qubits()) + ")");
  if (sc.model.local_strategy && !sc.settings.empty()) {
    const auto& st = *sc.model.local_strategy;
    if (st.size() != sc.settings.size()) {
      col.add("/model/local_strategy", "expected one answer list per party");
    } else {
      for (std::size_t k = 0; k < st.size(); ++k)
        if (st[k].size() != sc.settings[k].size())
          col.add("/model/local_strategy/" + std::to_string(k), "expected one answer per setting");
    }
  }

  if (!col.ok()) throw SchemaError(col.issues());
  return sc;
}

/// Every schema violation of a document; empty means valid.
inline std::vector<SchemaIssue> validate_scenario(const Json& doc, bool force_c_units = false) {
  try {
    parse_scenario(doc, force_c_units);
  } catch (const SchemaError& e) {
    return e.issues();
  }
  return {};
}

/// Fails with a schema error unless the listed top-level sections exist.
inline void require_sections(const Scenario& sc, std::initializer_list<const char*> keys, const std::string& what) {
  std::vector<SchemaIssue> issues;
  for (const char* k : keys)
    if (!sc.source.contains(k)) issues.push_back({std::string("/") + k, "required by " + what});
  if (!issues.empty()) throw SchemaError(std::move(issues));
}

}  // namespace localparts
