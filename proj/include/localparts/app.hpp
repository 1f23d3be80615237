#pragma once

// Command-line front end: subcommand dispatch, scenario loading, presets and
// output files. `run` never calls exit(); it returns the process status and
// writes machine-readable errors to `err`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "localparts/behavior.hpp"
#include "localparts/hvmodels.hpp"
#include "localparts/inequality.hpp"
#include "localparts/io.hpp"
#include "localparts/quantum.hpp"
#include "localparts/scenario.hpp"
#include "localparts/signaling.hpp"
#include "localparts/spacetime.hpp"

namespace localparts::app {

/// Bad command-line input that is not a scenario schema violation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string scenario;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  bool c_units = false;
  unsigned workers = 1;
};

// ---------------------------------------------------------------------------
// Output plumbing

class Sink {
 public:
  Sink(const Flags& f, std::ostream& out) : flags_(f), out_(out) {}

  bool to_dir() const { return !flags_.out.empty(); }

  void file(const std::string& name, const std::function<void(std::ostream&)>& write) {
    if (!to_dir()) return;
    std::filesystem::create_directories(flags_.out);
    const std::filesystem::path path = std::filesystem::path(flags_.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write(os);
    if (!os) throw std::runtime_error("failed writing " + path.string());
    written_.push_back(path.string());
  }

  void json_file(const std::string& name, const Json& j) {
    file(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

  /// Prints the main result; with --out, lists the files written instead.
  void finish(const Json& main) {
    if (to_dir()) {
      out_ << Json{{"outputs", written_}}.dump(2) << '\n';
    } else {
      out_ << main.dump(2) << '\n';
    }
  }

  std::ostream& stdout_stream() { return out_; }

 private:
  const Flags& flags_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------
// Shared helpers

inline Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open scenario file " + path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw SchemaError({{"", std::string("invalid JSON: ") + e.what()}});
  }
}

inline double parse_speed_flag(const std::string& text, double c, const char* flag) {
  detail::Collector col;
  Json j;
  if (!text.empty() && text.back() == 'c') {
    j = text;
  } else {
    try {
      std::size_t used = 0;
      j = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": expected a number or a string like 1e5c, got \"" + text + "\"");
    }
  }
  auto v = col.speed(j, flag, c);
  if (!v) throw UsageError(std::string(flag) + ": " + col.issues().front().message);
  return *v;
}

inline Event parse_event_flag(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": expected t,x,y");
    }
  }
  if (v.size() < 2 || v.size() > 3) throw UsageError(std::string(flag) + ": expected t,x[,y]");
  return Event{v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

/// Devices spread 1 km apart (or 1 unit with c = 1), at rest, arriving
/// together: all pairs keep their coordination under every timing model.
inline Geometry resting_geometry(int parties, double c) {
  Geometry g;
  g.c = c;
  const double spacing = c == 1.0 ? 1.0 : 1000.0;
  for (int k = 0; k < parties; ++k) {
    g.devices.push_back(Event{0.0, spacing * k, 0.0});
    g.boosts.emplace_back(0.0);
  }
  return g;
}

inline Json schema_issues_json(const std::vector<SchemaIssue>& issues) {
  Json arr = Json::array();
  for (const auto& i : issues) arr.push_back({{"path", i.path}, {"message", i.message}});
  return arr;
}

inline Scenario load_scenario(const Flags& f) {
  if (f.scenario.empty()) throw UsageError("--scenario <path> is required");
  Scenario sc = parse_scenario(read_json_file(f.scenario), f.c_units);
  if (f.trials) sc.trials = *f.trials;
  if (f.seed) sc.seed = *f.seed;
  return sc;
}

inline Behavior scenario_target(const Scenario& sc) {
  return born_behavior(sc.state->build(), sc.settings);
}

/// Per-tuple full-product correlators with standard errors next to the
/// model's predicted values.
inline Json correlator_table(const Tally& tally, const Behavior& predicted) {
  Json rows = Json::array();
  for (std::size_t s = 0; s < predicted.num_setting_tuples(); ++s) {
    const std::vector<int> t = predicted.setting_tuple(s);
    const Estimate e = tally.correlator(t);
    if (e.samples == 0) continue;
    rows.push_back({{"settings", t},
                    {"empirical", estimate_to_json(e)},
                    {"predicted", correlator(predicted, t)}});
  }
  return rows;
}

/// Signed chain terms on a bipartite tally.
inline Estimate chain_estimate(const Tally& tally, const ChainSpec& spec) {
  std::vector<std::pair<int, Estimate>> terms;
  for (const ChainTerm& t : spec.terms()) terms.emplace_back(t.sign, tally.correlator({t.alice, t.bob}));
  return combine(terms);
}

inline SettingsSchedule chain_schedule(const ChainSpec& spec) {
  SettingsSchedule s;
  for (const ChainTerm& t : spec.terms()) s.tuples.push_back({t.alice, t.bob});
  return s;
}

inline DeterministicStrategy strategy_from_bound(const LocalBound& lb) { return {lb.alice, lb.bob}; }

// ---------------------------------------------------------------------------
// Subcommands

struct TimingArgs {
  std::string L, dt, v, v_bb;
};

inline Json timing_json(std::optional<double> L, std::optional<double> dt, std::optional<double> v_bb,
                        std::optional<double> v, double c, Units units) {
  auto opt = [](std::optional<double> x) { return x ? Json(*x) : Json(nullptr); };
  Json j;
  j["units"] = units == Units::c ? "c" : "si";
  j["c"] = c;
  j["inputs"] = {{"L", opt(L)}, {"dt", opt(dt)}, {"v_bb", opt(v_bb)}, {"v", opt(v)}};
  std::optional<double> vbb_equiv;
  if (v) vbb_equiv = equivalent_vbb(*v, c);
  j["v_bb"] = v_bb ? opt(v_bb) : opt(vbb_equiv);
  j["v_bb_equivalent"] = opt(vbb_equiv);
  if (v_bb && *v_bb > 0.0) j["v_equivalent"] = equivalent_vbb(*v_bb, c);
  if (L && dt && v_bb) {
    TimingScenario s{*L, *dt, *v_bb, v.value_or(c), c};
    j["before_before"] = before_before(s);
  }
  if (L && dt && v) {
    TimingScenario s{*L, *dt, 0.0, *v, c};
    j["finite_speed_cut"] = finite_speed_cut(s);
    if (*vbb_equiv < c) {
      TimingScenario eq{*L, *dt, *vbb_equiv, *v, c};
      const bool bb = before_before(eq);
      j["equivalence"] = {{"v_bb", *vbb_equiv},
                          {"before_before_at_equivalent_v_bb", bb},
                          {"agrees_with_finite_speed_cut", bb == finite_speed_cut(s)}};
    } else {
      j["equivalence"] = nullptr;  // v <= c has no sub-luminal counterpart
    }
  }
  return j;
}

inline int cmd_timing(const Flags& f, const TimingArgs& a, Sink& sink) {
  std::optional<TimingInput> from_file;
  Units units = f.c_units ? Units::c : Units::si;
  if (!f.scenario.empty()) {
    Scenario sc = load_scenario(f);
    units = sc.units;
    from_file = sc.timing;
  }
  const double c = units == Units::c ? 1.0 : kSpeedOfLight;
  TimingInput in = from_file.value_or(TimingInput{});
  auto number = [](const std::string& s, const char* flag) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": expected a number");
    }
  };
  if (!a.L.empty()) in.L = number(a.L, "--L");
  if (!a.dt.empty()) in.dt = number(a.dt, "--dt");
  if (!a.v.empty()) in.v = parse_speed_flag(a.v, c, "--v");
  if (!a.v_bb.empty()) in.v_bb = parse_speed_flag(a.v_bb, c, "--v-bb");
  if (!in.v && !in.v_bb) throw UsageError("timing: give at least --v or --v-bb");
  if (in.L && !(*in.L > 0.0)) throw UsageError("--L must be > 0");
  if (in.dt && *in.dt < 0.0) throw UsageError("--dt must be >= 0");
  if (in.v && !(*in.v > 0.0)) throw UsageError("--v must be > 0");
  if (in.v_bb && !(*in.v_bb >= 0.0 && *in.v_bb < c)) throw UsageError("--v-bb must lie in [0, c)");
  const Json j = timing_json(in.L, in.dt, in.v_bb, in.v, c, units);
  sink.json_file("timing.json", j);
  sink.finish(j);
  return 0;
}

struct ChshArgs {
  std::uint64_t trials = 0;
};

inline Json chsh_json(std::uint64_t trials, std::uint64_t seed, unsigned workers) {
  const ChainSpec spec(2);
  const ChainOptimum opt = quantum_chain_optimum(2);
  Json j;
  j["expression"] = "E(a1,b1) + E(a2,b1) + E(a2,b2) - E(a1,b2)";
  j["optimized"] = {{"value", opt.value},
                    {"tsirelson", 2.0 * std::numbers::sqrt2},
                    {"gap", 2.0 * std::numbers::sqrt2 - opt.value},
                    {"alice_angles", opt.alice_angles},
                    {"bob_angles", opt.bob_angles}};
  const LocalBound lb = local_bound(spec);
  j["local_bound"] = lb.value;
  if (trials > 0) {
    const Behavior target = born_behavior(make_singlet(), {opt.alice_angles, opt.bob_angles});
    const Geometry g = resting_geometry(2, kSpeedOfLight);
    ModelConfig quantum;
    ModelConfig local;
    local.kind = ModelKind::local;
    local.local_strategy = strategy_from_bound(lb);
    Json mc;
    for (const auto& [name, model] : {std::pair<const char*, ModelConfig>{"quantum", quantum}, {"local", local}}) {
      Tally tally({2, 2});
      tally.add(sample_runs(model, g, target, chain_schedule(spec), trials, seed, {workers}));
      const Estimate e = chain_estimate(tally, spec);
      mc[name] = estimate_to_json(e);
    }
    j["monte_carlo"] = {{"trials", trials}, {"seed", seed}, {"quantum", mc["quantum"]}, {"local", mc["local"]}};
  }
  return j;
}

inline int cmd_chsh(const Flags& f, Sink& sink) {
  const Json j = chsh_json(f.trials.value_or(0), f.seed.value_or(0), f.workers);
  sink.json_file("chsh.json", j);
  sink.finish(j);
  return 0;
}

struct ChainArgs {
  int n = 2;
  bool local_bound = false;
  bool quantum = false;
  std::optional<double> p;
  std::optional<double> epsilon;
};

inline int cmd_chain(const ChainArgs& a, Sink& sink) {
  if (a.n < 2) throw UsageError("--n must be >= 2");
  const bool all = !a.local_bound && !a.quantum && !a.p && !a.epsilon;
  const ChainSpec spec(a.n);
  Json j;
  j["n"] = a.n;
  std::optional<LocalBound> lb;
  if (a.local_bound || all || a.p) {
    if (a.n > kMaxEnumeratedChain) throw UsageError("--local-bound: N must be <= 16");
    lb = local_bound(spec);
    j["local_bound"] = lb->value;
    j["local_strategy"] = {{"alice", lb->alice}, {"bob", lb->bob}};
  }
  std::optional<ChainOptimum> q;
  if (a.quantum || all || a.p) {
    if (a.n > 12) throw UsageError("--quantum: N must be <= 12");
    q = quantum_chain_optimum(a.n);
    j["quantum"] = {{"value", q->value},
                    {"closed_form", 2.0 * a.n * std::cos(std::numbers::pi / (2.0 * a.n))},
                    {"alice_angles", q->alice_angles},
                    {"bob_angles", q->bob_angles}};
  }
  if (a.p) {
    const MixtureSpec m(*a.p);
    const ChainValues v{a.n, q->value, lb->value};
    j["mixture"] = {{"p", m.p}, {"max_value", mixture_max_value(m, v)}, {"deviation", mixture_deviation(m, v)}};
  }
  if (a.epsilon) {
    const ThresholdResult t = detection_threshold_N(a.p.value_or(0.0), *a.epsilon);
    Json seq = Json::array();
    for (std::size_t k = 0; k < t.values.size(); ++k)
      seq.push_back({{"n", t.values[k].n},
                     {"quantum", t.values[k].quantum},
                     {"local", t.values[k].local},
                     {"deviation", t.deviations[k]}});
    j["threshold"] = {{"p", a.p.value_or(0.0)},
                      {"epsilon", *a.epsilon},
                      {"n", t.n ? Json(*t.n) : Json(nullptr)},
                      {"sequence", seq}};
  }
  sink.json_file("chain.json", j);
  sink.finish(j);
  return 0;
}

/// Sampling plus summary for a scenario with geometry, state and settings.
struct SimulationOutput {
  std::vector<RunRecord> runs;
  Json summary;
};

inline SimulationOutput simulate(const Scenario& sc, unsigned workers, const SettingsSchedule& schedule = {}) {
  const Behavior target = scenario_target(sc);
  const Geometry& g = *sc.geometry;
  SimulationOutput out;
  out.runs = sample_runs(sc.model, g, target, schedule, sc.trials, sc.seed, {workers});
  Tally tally(target.settings_per_party());
  tally.add(out.runs);
  const Behavior predicted = effective_behavior(sc.model, g, target);
  Json derived;
  derived["model"] = to_string(sc.model.kind);
  derived["coordination"] = coordination_to_json(coordination_map(sc.model, g));
  Json pairs = Json::array();
  for (const auto& [i, k] : device_pairs(g.parties())) {
    const TimingScenario ts = pair_scenario(g, i, k, sc.model.v);
    Json p{{"pair", pair_name(i, k)}, {"L", ts.L}, {"dt", ts.dt}, {"v_bb", ts.v_bb}, {"before_before", before_before(ts)}};
    if (sc.model.kind == ModelKind::finite_speed) p["finite_speed_cut"] = finite_speed_cut(ts);
    pairs.push_back(std::move(p));
  }
  derived["pairs"] = std::move(pairs);
  out.summary["scenario"] = sc.name;
  out.summary["inputs"] = sc.source;
  out.summary["derived"] = std::move(derived);
  out.summary["statistics"] = {{"trials", sc.trials}, {"seed", sc.seed}, {"correlators", correlator_table(tally, predicted)}};
  return out;
}

inline int cmd_simulate(const Flags& f, Sink& sink) {
  const Scenario sc = load_scenario(f);
  require_sections(sc, {"geometry", "state", "settings"}, "simulate");
  // With a chain section on a bipartite N x N scenario, only the chain's
  // setting pairs are drawn and the sampled chain value is reported.
  std::optional<ChainSpec> spec;
  if (sc.chain && sc.settings.size() == 2 && static_cast<int>(sc.settings[0].size()) == sc.chain->n &&
      static_cast<int>(sc.settings[1].size()) == sc.chain->n)
    spec.emplace(sc.chain->n);
  SimulationOutput sim = simulate(sc, f.workers, spec ? chain_schedule(*spec) : SettingsSchedule{});
  if (spec) {
    Tally tally(scenario_target(sc).settings_per_party());
    tally.add(sim.runs);
    const Behavior predicted = effective_behavior(sc.model, *sc.geometry, scenario_target(sc));
    sim.summary["statistics"]["chain"] = {{"n", spec->n()},
                                          {"empirical", estimate_to_json(chain_estimate(tally, *spec))},
                                          {"predicted", chain_value(predicted, *spec)}};
  }
  const int parties = sc.geometry->parties();
  if (parties > 3) throw UsageError("simulate: CSV output supports at most 3 parties");
  sink.file(sc.outputs.csv, [&](std::ostream& os) { write_runs_csv(os, sim.runs, parties); });
  sink.json_file(sc.outputs.summary, sim.summary);
  if (!sink.to_dir() && f.format == "csv") {
    write_runs_csv(sink.stdout_stream(), sim.runs, parties);
    return 0;
  }
  sink.finish(sim.summary);
  return 0;
}

/// Report in the signaling schema for a scenario's model: how the model's
/// effective behavior depends on the hub setting at the off pair, whether a
/// local-parts model could avoid that, and the point-D window if the
/// geometry has one.
inline Json signal_report(const Scenario& sc) {
  const Behavior target = scenario_target(sc);
  if (target.parties() != 3) throw UsageError("signal: tripartite state and settings required");
  const Geometry& g = *sc.geometry;
  const auto [i, j] = sc.off_pair;
  const int hub = 3 - i - j;
  const Behavior effective = effective_behavior(sc.model, g, target);

  const CoordinationMap map = coordination_map(sc.model, g);
  const auto pairs = device_pairs(3);
  bool only_off_pair = sc.model.kind != ModelKind::local && sc.model.kind != ModelKind::mixture;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (map.on[k] == (pairs[k] == std::make_pair(i, j))) only_off_pair = false;
  const auto pd = find_point_d(g.devices[static_cast<std::size_t>(hub)], g.devices[static_cast<std::size_t>(i)],
                               g.devices[static_cast<std::size_t>(j)], g.c);

  FtlReport rep;
  if (pd && only_off_pair) {
    // The model's effective behavior is exactly the constructive off-pair model.
    rep = ftl_protocol_report(target, sc.off_pair, g, sc.settings);
  } else {
    rep.settings = sc.settings;
    rep.feasibility = localparts_feasible(target, sc.off_pair);
    rep.feasible = rep.feasibility.feasible;
    rep.signaling_distance = signaling_distance(effective, {i, j});
    rep.single_receiver = {signaling_distance(effective, {i}), signaling_distance(effective, {j})};
    rep.bias = 0.5 * rep.signaling_distance;
    rep.channel = rep.signaling_distance > kLpTolerance;
    if (pd) {
      rep.point_d = *pd;
      rep.light_deficit_length = g.c * pd->advantage;
    }
    std::ostringstream os;
    os << std::setprecision(6);
    if (rep.channel)
      os << party_letter(hub) << "'s setting shifts the " << party_letter(i) << party_letter(j)
         << " joint marginal by total variation " << rep.signaling_distance << " under the "
         << to_string(sc.model.kind) << " model" << (pd ? "" : "; the geometry has no point D");
    else
      os << "no channel: under the " << to_string(sc.model.kind) << " model the " << party_letter(i)
         << party_letter(j) << " joint marginal does not depend on " << party_letter(hub) << "'s setting";
    rep.statement = os.str();
  }
  Json out = ftl_report_to_json(rep, sc.units == Units::si ? std::optional<double>(1.0) : std::nullopt);
  out["model"] = to_string(sc.model.kind);
  out["coordination"] = coordination_to_json(map);
  out["off_pair"] = pair_name(i, j);
  if (!pd) {
    out["advantage"] = nullptr;
    out["advantage_seconds"] = nullptr;
    out["point_d"] = nullptr;
    out["light_deficit_length"] = nullptr;
  }
  return out;
}

inline int cmd_signal(const Flags& f, bool sweep, Sink& sink) {
  if (sweep) {
    const Json j = sweep_to_json(localparts_settings_sweep());
    sink.json_file("sweep.json", j);
    sink.finish(j);
    return 0;
  }
  const Scenario sc = load_scenario(f);
  require_sections(sc, {"geometry", "state", "settings"}, "signal");
  const Json j = signal_report(sc);
  sink.json_file(sc.outputs.report, j);
  sink.finish(j);
  return 0;
}

struct PointDArgs {
  std::string a, b, c;
};

inline int cmd_point_d(const Flags& f, const PointDArgs& a, Sink& sink) {
  Event ea, eb, ec;
  double c = f.c_units ? 1.0 : kSpeedOfLight;
  Units units = f.c_units ? Units::c : Units::si;
  if (!f.scenario.empty()) {
    const Scenario sc = load_scenario(f);
    require_sections(sc, {"geometry"}, "point-d");
    if (sc.geometry->parties() != 3) throw UsageError("point-d: geometry must have 3 devices");
    const auto [i, j] = sc.off_pair;
    ea = sc.geometry->devices[static_cast<std::size_t>(3 - i - j)];
    eb = sc.geometry->devices[static_cast<std::size_t>(i)];
    ec = sc.geometry->devices[static_cast<std::size_t>(j)];
    c = sc.c();
    units = sc.units;
  } else {
    if (a.a.empty() || a.b.empty() || a.c.empty())
      throw UsageError("point-d: give --scenario or all of --event-a, --event-b, --event-c");
    ea = parse_event_flag(a.a, "--event-a");
    eb = parse_event_flag(a.b, "--event-b");
    ec = parse_event_flag(a.c, "--event-c");
  }
  const auto pd = find_point_d(ea, eb, ec, c);
  Json j;
  j["units"] = units == Units::c ? "c" : "si";
  j["a"] = event_to_json(ea);
  j["b"] = event_to_json(eb);
  j["c_event"] = event_to_json(ec);
  j["found"] = pd.has_value();
  if (pd) {
    j["d"] = event_to_json(pd->d);
    j["advantage"] = pd->advantage;
    j["advantage_seconds"] = units == Units::si ? Json(pd->advantage) : Json(nullptr);
    j["checks"] = {{"in_future_of_b", in_future_lightcone(eb, pd->d, c)},
                   {"in_future_of_c", in_future_lightcone(ec, pd->d, c)},
                   {"outside_future_of_a", !in_future_lightcone(ea, pd->d, c)}};
  } else {
    j["d"] = nullptr;
    j["advantage"] = nullptr;
    j["advantage_seconds"] = nullptr;
  }
  sink.json_file("point_d.json", j);
  sink.finish(j);
  return 0;
}

inline int cmd_validate(const Flags& f, std::ostream& out) {
  if (f.scenario.empty()) throw UsageError("validate: --scenario <path> is required");
  const Json doc = read_json_file(f.scenario);
  const auto issues = validate_scenario(doc, f.c_units);
  if (!issues.empty()) throw SchemaError(issues);
  out << Json{{"ok", true}, {"scenario", f.scenario}}.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  const char* name;
  const char* description;
  std::function<Json()> document;                          // scenario document
  std::function<void(Scenario&, const Flags&, Sink&)> run;  // writes outputs
};

namespace presets {

inline constexpr std::uint64_t kDefaultTrials = 100000;
inline constexpr std::uint64_t kDefaultSeed = 20131;

inline Json device(double t, double x, double y, double beta) {
  return Json{{"t", t}, {"x", x}, {"y", y}, {"beta", beta}};
}

inline Json base(const char* name) {
  Json j;
  j["schema"] = kScenarioSchema;
  j["name"] = name;
  j["units"] = "si";
  j["trials"] = kDefaultTrials;
  j["seed"] = kDefaultSeed;
  return j;
}

inline Json chsh_settings() {
  const ChainOptimum a = equally_spaced_chain_angles(2);
  return Json{a.alice_angles, a.bob_angles};
}

// A pair of beam-splitters 10.6 km apart. With `moving`, both recede from
// each other at 1e-5 c so each one's rest frame puts its own choice first.
inline Json pair_geometry(bool moving) {
  const double beta = moving ? 1e-5 : 0.0;
  return Json{{"devices", {device(0.0, -5300.0, 0.0, -beta), device(0.0, 5300.0, 0.0, beta)}}};
}

// A, B, C on a line at 0, 10 and 20 km. With `receding`, B and C move apart.
inline Json triple_geometry(bool receding) {
  const double beta = receding ? 1e-5 : 0.0;
  return Json{{"devices", {device(0.0, 0.0, 0.0, 0.0), device(0.0, 1e4, 0.0, -beta), device(0.0, 2e4, 0.0, beta)}}};
}

inline Json ghz_settings() {
  const double h = 0.5 * std::numbers::pi;
  return Json{{0.0, h}, {0.0, h}, {0.0, h}};
}

inline void write_summary(Sink& sink, const Json& summary) {
  sink.json_file("summary.json", summary);
  sink.finish(summary);
}

// Detection-switch setup as a table. Party A1 is Alice's switch (setting 0 leaves the
// detectors coordinated, setting 1 breaks A-B coordination), A2 and B2 are
// the detectors watched by Bob. The A2-B2 joint rate then follows the
// switch although neither detector alone does.
inline Behavior detection_switch_behavior(const Behavior& pair) {
  const auto& m = pair.settings_per_party();
  Behavior out({2, m[0], m[1]});
  const Behavior product =
      product_behavior({averaged_marginal(pair, {0}), averaged_marginal(pair, {1})});
  for (std::size_t s = 0; s < out.num_setting_tuples(); ++s) {
    const std::vector<int> t = out.setting_tuple(s);
    const Behavior& src = t[0] == 0 ? pair : product;
    const std::size_t ps = src.setting_index(std::vector<int>{t[1], t[2]});
    for (std::size_t o = 0; o < 4; ++o) out.at(s, o) = src.at(ps, o);  // switch outcome fixed to +1
  }
  return out;
}

inline void run_fig1(Scenario& sc, const Flags& f, Sink& sink) {
  const Behavior pair = scenario_target(sc);
  const Behavior target = detection_switch_behavior(pair);
  const Geometry g = resting_geometry(3, sc.c());
  ModelConfig quantum;
  std::vector<RunRecord> runs = sample_runs(quantum, g, target, {}, sc.trials, sc.seed, {f.workers});
  for (RunRecord& r : runs)
    if (r.settings[0] == 1) r.coordination = static_cast<std::uint8_t>(r.coordination & ~(1u << 2));  // bc OFF
  Tally tally(target.settings_per_party());
  tally.add(runs);

  Json rates = Json::array();
  for (int sw = 0; sw < 2; ++sw) {
    const Estimate e = tally.correlator({sw, 0, 0});
    rates.push_back({{"switch", sw},
                     {"same_outcome_rate", 0.5 * (1.0 + e.value)},
                     {"std_error", 0.5 * e.std_error},
                     {"samples", e.samples}});
  }
  const double sd = signaling_distance(target, {1, 2});
  Json report;
  report["parties"] = {"A1 (switch)", "A2", "B2"};
  report["signaling_distance"] = sd;
  report["single_receiver_distance"] = {signaling_distance(target, {1}), signaling_distance(target, {2})};
  report["bias"] = 0.5 * sd;
  report["channel"] = sd > kLpTolerance;
  report["settings"] = sc.settings;
  report["behavior"] = behavior_to_json(target);
  report["statement"] = sd > kLpTolerance
                            ? "the A2-B2 joint rate depends on the A1 switch; neither A2 nor B2 alone does"
                            : "no channel";
  Json summary;
  summary["preset"] = sc.name;
  summary["inputs"] = sc.source;
  summary["derived"] = {{"signaling_distance", sd}, {"bias", 0.5 * sd}};
  summary["statistics"] = {{"trials", sc.trials}, {"seed", sc.seed}, {"joint_rates", rates}};
  sink.file("runs.csv", [&](std::ostream& os) { write_runs_csv(os, runs, 3); });
  sink.json_file("report.json", report);
  write_summary(sink, summary);
}

inline void run_fig2(Scenario& sc, const Flags& f, Sink& sink) {
  const SimulationOutput sim = simulate(sc, f.workers);
  const Json report = signal_report(sc);
  Json summary = sim.summary;
  summary["derived"]["signaling_distance"] = report["signaling_distance"];
  summary["derived"]["advantage_seconds"] = report["advantage_seconds"];
  summary["derived"]["feasible"] = report["feasible"];
  sink.file("runs.csv", [&](std::ostream& os) { write_runs_csv(os, sim.runs, 3); });
  sink.json_file("report.json", report);
  write_summary(sink, summary);
}

inline void run_before_before(Scenario& sc, const Flags& f, Sink& sink) {
  const ChainSpec spec(2);
  const SettingsSchedule schedule = chain_schedule(spec);
  Json configs = Json::array();
  for (const bool moving : {false, true}) {
    Scenario s = sc;
    s.geometry = parse_scenario(Json{{"schema", kScenarioSchema}, {"geometry", pair_geometry(moving)}}).geometry;
    s.seed = sc.seed + (moving ? 1 : 0);
    const SimulationOutput sim = simulate(s, f.workers, schedule);
    Tally tally({2, 2});
    tally.add(sim.runs);
    const Estimate chsh = chain_estimate(tally, spec);
    const char* label = moving ? "S2" : "S1";
    sink.file(moving ? "s2.csv" : "s1.csv", [&](std::ostream& os) { write_runs_csv(os, sim.runs, 2); });
    configs.push_back({{"set", label},
                       {"beam_splitters", moving ? "receding at 1e-5 c" : "at rest"},
                       {"coordination", sim.summary["derived"]["coordination"]},
                       {"pairs", sim.summary["derived"]["pairs"]},
                       {"chsh", estimate_to_json(chsh)},
                       {"chsh_minus_2_over_sigma", (chsh.value - 2.0) / chsh.std_error},
                       {"seed", s.seed}});
  }
  Json summary;
  summary["preset"] = sc.name;
  summary["inputs"] = sc.source;
  summary["derived"] = {{"chsh_local_bound", 2.0}, {"chsh_quantum", 2.0 * std::numbers::sqrt2}};
  summary["statistics"] = {{"trials_per_set", sc.trials}, {"configurations", configs}};
  write_summary(sink, summary);
}

inline void run_finite_speed(Scenario& sc, const Flags& f, Sink& sink) {
  const TimingInput& t = *sc.timing;
  const Json timing = timing_json(t.L, t.dt, t.v_bb, t.v, sc.c(), sc.units);
  const ChainSpec spec(2);
  const SimulationOutput sim = simulate(sc, f.workers, chain_schedule(spec));
  Tally tally({2, 2});
  tally.add(sim.runs);
  const Estimate chsh = chain_estimate(tally, spec);
  Json summary = sim.summary;
  summary["preset"] = sc.name;
  summary["derived"]["timing"] = timing;
  summary["statistics"]["chsh"] = estimate_to_json(chsh);
  sink.file("runs.csv", [&](std::ostream& os) { write_runs_csv(os, sim.runs, 2); });
  sink.json_file("timing.json", timing);
  write_summary(sink, summary);
}

inline void run_mixture_chain(Scenario& sc, const Flags& f, Sink& sink) {
  const int n = sc.chain->n;
  const ChainSpec spec(n);
  const ChainOptimum q = quantum_chain_optimum(n);
  const LocalBound lb = local_bound(spec);
  const ChainValues values{n, q.value, lb.value};
  const MixtureSpec m(sc.model.p);
  sc.model.local_strategy = strategy_from_bound(lb);
  const double predicted = mixture_max_value(m, values);

  const SimulationOutput sim = simulate(sc, f.workers, chain_schedule(spec));
  Tally tally(scenario_target(sc).settings_per_party());
  tally.add(sim.runs);
  const Estimate emp = chain_estimate(tally, spec);

  Json derived;
  derived["n"] = n;
  derived["quantum"] = q.value;
  derived["quantum_closed_form"] = 2.0 * n * std::cos(std::numbers::pi / (2.0 * n));
  derived["local_bound"] = lb.value;
  derived["local_strategy"] = {{"alice", lb.alice}, {"bob", lb.bob}};
  derived["p"] = m.p;
  derived["predicted_mixture_value"] = predicted;
  derived["deviation"] = mixture_deviation(m, values);
  derived["at_settings"] = chain_value(scenario_target(sc), spec);
  if (sc.chain->epsilon) {
    const ThresholdResult t = detection_threshold_N(m.p, *sc.chain->epsilon);
    Json seq = Json::array();
    for (std::size_t k = 0; k < t.values.size(); ++k)
      seq.push_back({{"n", t.values[k].n}, {"deviation", t.deviations[k]}});
    derived["threshold"] = {{"epsilon", *sc.chain->epsilon},
                            {"n", t.n ? Json(*t.n) : Json(nullptr)},
                            {"sequence", seq}};
  }
  Json summary;
  summary["preset"] = sc.name;
  summary["inputs"] = sc.source;
  summary["derived"] = derived;
  summary["statistics"] = {{"trials", sc.trials},
                           {"seed", sc.seed},
                           {"chain", estimate_to_json(emp)},
                           {"z", (emp.value - predicted) / emp.std_error}};
  sink.file("runs.csv", [&](std::ostream& os) { write_runs_csv(os, sim.runs, 2); });
  write_summary(sink, summary);
}

}  // namespace presets

inline const std::vector<Preset>& preset_table() {
  using namespace presets;
  static const std::vector<Preset> table{
      {"fig1-detection", "detector switch breaks A-B coordination; A2-B2 joint rate follows the switch",
       [] {
         Json j = base("fig1-detection");
         j["state"] = "singlet";
         j["settings"] = Json{{0.0}, {0.0}};
         return j;
       },
       run_fig1},
      {"fig2a", "GHZ3 on A, B, C at rest: every pair coordinated, no channel",
       [] {
         Json j = base("fig2a");
         j["geometry"] = triple_geometry(false);
         j["model"] = {{"kind", "multisim"}};
         j["state"] = "ghz3";
         j["settings"] = ghz_settings();
         return j;
       },
       run_fig2},
      {"fig2b", "GHZ3 with B and C receding: B-C coordination OFF, signal to an observer at D",
       [] {
         Json j = base("fig2b");
         j["geometry"] = triple_geometry(true);
         j["model"] = {{"kind", "multisim"}};
         j["state"] = "ghz3";
         j["settings"] = ghz_settings();
         return j;
       },
       run_fig2},
      {"before-before", "singlet CHSH with resting (S1) and receding (S2) beam-splitters",
       [] {
         Json j = base("before-before");
         j["geometry"] = pair_geometry(true);
         j["model"] = {{"kind", "multisim"}};
         j["state"] = "singlet";
         j["settings"] = chsh_settings();
         return j;
       },
       run_before_before},
      {"finite-speed-1e5c", "influences at 1e5 c in the lab frame; equivalent before-before speed",
       [] {
         Json j = base("finite-speed-1e5c");
         j["timing"] = {{"L", 10600.0}, {"dt", 0.0}, {"v", "1e5c"}};
         j["geometry"] = pair_geometry(false);
         j["model"] = {{"kind", "finite_speed"}, {"v", "1e5c"}};
         j["state"] = "singlet";
         j["settings"] = chsh_settings();
         return j;
       },
       run_finite_speed},
      {"mixture-chain", "local/quantum mixture on the chained expression",
       [] {
         Json j = base("mixture-chain");
         const ChainOptimum a = equally_spaced_chain_angles(4);
         j["geometry"] = pair_geometry(false);
         j["model"] = {{"kind", "mixture"}, {"p", 0.1}};
         j["state"] = "singlet";
         j["settings"] = Json{a.alice_angles, a.bob_angles};
         j["chain"] = {{"n", 4}, {"epsilon", 0.15}};
         return j;
       },
       run_mixture_chain},
  };
  return table;
}

inline const Preset& find_preset(const std::string& name) {
  for (const Preset& p : preset_table())
    if (name == p.name) return p;
  throw UsageError("unknown preset \"" + name + "\"; try `preset list`");
}

inline int cmd_preset_list(std::ostream& out) {
  Json arr = Json::array();
  for (const Preset& p : preset_table()) arr.push_back({{"name", p.name}, {"description", p.description}});
  out << Json{{"presets", arr}}.dump(2) << '\n';
  return 0;
}

inline int cmd_preset_run(const std::string& name, const Flags& f, Sink& sink) {
  const Preset& p = find_preset(name);
  Scenario sc = parse_scenario(p.document(), false);
  if (f.trials) sc.trials = *f.trials;
  if (f.seed) sc.seed = *f.seed;
  sc.source["trials"] = sc.trials;
  sc.source["seed"] = sc.seed;
  p.run(sc, f, sink);
  return 0;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"localparts: timing criteria, Bell expressions, hidden-influence models and signaling reports"};
  cli.name("localparts");
  cli.require_subcommand(1);
  Flags f;
  std::uint64_t trials = 0, seed = 0;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--scenario", f.scenario, "scenario JSON file");
    c->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "random seed");
    c->add_option("--out", f.out, "output directory");
    c->add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
    c->add_flag("--c-units", f.c_units, "numbers are in units with c = 1");
    c->add_option("--workers", f.workers, "sampling threads (output does not depend on it)")
        ->check(CLI::Range(1u, 256u));
  };

  TimingArgs timing_args;
  auto* timing = cli.add_subcommand("timing", "evaluate the timing criteria and the equivalent speeds");
  add_common(timing);
  timing->add_option("--L", timing_args.L, "device separation");
  timing->add_option("--dt", timing_args.dt, "arrival time difference");
  timing->add_option("--v", timing_args.v, "hidden-influence speed (number or e.g. 1e5c)");
  timing->add_option("--v-bb", timing_args.v_bb, "beam-splitter recession speed (number or e.g. 1e-5c)");

  auto* chsh = cli.add_subcommand("chsh", "optimize CHSH on the singlet; Monte Carlo with --trials");
  add_common(chsh);

  ChainArgs chain_args;
  double chain_p = -1.0, chain_eps = -1.0;
  auto* chain = cli.add_subcommand("chain", "chained Bell expression: local bound, quantum value, mixtures");
  add_common(chain);
  chain->add_option("--n", chain_args.n, "settings per party")->required();
  chain->add_flag("--local-bound", chain_args.local_bound, "enumerate the local bound");
  chain->add_flag("--quantum", chain_args.quantum, "optimize the singlet value");
  chain->add_option("--p", chain_p, "local weight of a mixture")->check(CLI::Range(0.0, 1.0));
  chain->add_option("--epsilon", chain_eps, "detection threshold for the N scan")->check(CLI::PositiveNumber);

  auto* simulate_cmd = cli.add_subcommand("simulate", "sample run records from a scenario");
  add_common(simulate_cmd);

  bool sweep = false;
  auto* signal = cli.add_subcommand("signal", "signaling report for a tripartite scenario");
  add_common(signal);
  signal->add_flag("--sweep", sweep, "run the GHZ-family settings search instead");

  PointDArgs pd_args;
  auto* point_d = cli.add_subcommand("point-d", "find D inside the cones of B and C but outside A's");
  add_common(point_d);
  point_d->add_option("--event-a", pd_args.a, "t,x,y of A");
  point_d->add_option("--event-b", pd_args.b, "t,x,y of B");
  point_d->add_option("--event-c", pd_args.c, "t,x,y of C");

  auto* preset = cli.add_subcommand("preset", "list or run the shipped scenarios");
  preset->require_subcommand(1);
  auto* preset_list = preset->add_subcommand("list", "list presets");
  std::string preset_name;
  auto* preset_run = preset->add_subcommand("run", "run a preset");
  preset_run->add_option("name", preset_name, "preset name")->required();
  add_common(preset_run);

  auto* validate = cli.add_subcommand("validate", "check a scenario file without running it");
  add_common(validate);
  validate->add_option("file", f.scenario, "scenario JSON file");

  auto fail = [&](const char* kind, const std::string& message, const Json& issues, int code) {
    Json e{{"error", {{"kind", kind}, {"message", message}}}};
    if (!issues.is_null()) e["error"]["issues"] = issues;
    err << e.dump() << '\n';
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << cli.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << cli.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), nullptr, 2);
  }

  for (CLI::App* c : {timing, chsh, chain, simulate_cmd, signal, point_d, preset_run, validate}) {
    if (c->count("--trials")) f.trials = trials;
    if (c->count("--seed")) f.seed = seed;
  }
  if (chain_p >= 0.0) chain_args.p = chain_p;
  if (chain_eps > 0.0) chain_args.epsilon = chain_eps;

  try {
    Sink sink(f, out);
    if (*timing) return cmd_timing(f, timing_args, sink);
    if (*chsh) return cmd_chsh(f, sink);
    if (*chain) return cmd_chain(chain_args, sink);
    if (*simulate_cmd) return cmd_simulate(f, sink);
    if (*signal) return cmd_signal(f, sweep, sink);
    if (*point_d) return cmd_point_d(f, pd_args, sink);
    if (*preset_list) return cmd_preset_list(out);
    if (*preset_run) return cmd_preset_run(preset_name, f, sink);
    if (*validate) return cmd_validate(f, out);
    return fail("usage", "no subcommand", nullptr, 2);
  } catch (const SchemaError& e) {
    return fail("schema", e.what(), schema_issues_json(e.issues()), 2);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), nullptr, 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), nullptr, 1);
  }
}

}  // namespace localparts::app
