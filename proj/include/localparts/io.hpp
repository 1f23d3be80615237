#pragma once

// JSON encodings of behaviors, feasibility results and reports. Objects use
// insertion-ordered keys so that the same inputs always serialize to the
// same bytes.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "localparts/behavior.hpp"
#include "localparts/hvmodels.hpp"
#include "localparts/signaling.hpp"
#include "localparts/spacetime.hpp"

namespace localparts {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json nest_table(const Behavior& b, std::vector<int>& prefix) {
  Json arr = Json::array();
  const std::size_t party = prefix.size();
  const int m = b.settings_per_party()[party];
  for (int s = 0; s < m; ++s) {
    prefix.push_back(s);
    if (static_cast<int>(prefix.size()) == b.parties()) {
      const auto dist = b.distribution(b.setting_index(prefix));
      arr.push_back(Json(std::vector<double>(dist.begin(), dist.end())));
    } else {
      arr.push_back(nest_table(b, prefix));
    }
    prefix.pop_back();
  }
  return arr;
}

inline void unnest_table(const Json& node, Behavior& b, std::vector<int>& prefix) {
  const std::size_t party = prefix.size();
  const int m = b.settings_per_party()[party];
  if (!node.is_array() || static_cast<int>(node.size()) != m)
    throw std::invalid_argument("behavior json: table shape does not match settings_per_party");
  for (int s = 0; s < m; ++s) {
    prefix.push_back(s);
    const Json& child = node[static_cast<std::size_t>(s)];
    if (static_cast<int>(prefix.size()) == b.parties()) {
      if (!child.is_array() || child.size() != b.num_outcomes())
        throw std::invalid_argument("behavior json: each leaf must list 2^parties probabilities");
      const std::size_t idx = b.setting_index(prefix);
      for (std::size_t o = 0; o < b.num_outcomes(); ++o) b.at(idx, o) = child[o].get<double>();
    } else {
      unnest_table(child, b, prefix);
    }
    prefix.pop_back();
  }
}

}  // namespace detail

/// {parties, settings_per_party, table}; table[x][y]...[outcome index].
inline Json behavior_to_json(const Behavior& b) {
  Json j;
  j["parties"] = b.parties();
  j["settings_per_party"] = b.settings_per_party();
  std::vector<int> prefix;
  j["table"] = detail::nest_table(b, prefix);
  return j;
}

inline Behavior behavior_from_json(const Json& j) {
  const auto settings = j.at("settings_per_party").get<std::vector<int>>();
  if (j.contains("parties") && j.at("parties").get<int>() != static_cast<int>(settings.size()))
    throw std::invalid_argument("behavior json: parties disagrees with settings_per_party");
  Behavior b(settings);
  std::vector<int> prefix;
  detail::unnest_table(j.at("table"), b, prefix);
  return b;
}

inline Json event_to_json(const Event& e) { return Json{{"t", e.t}, {"x", e.x}, {"y", e.y}}; }

inline Json coordination_to_json(const CoordinationMap& map) {
  Json j = Json::object();
  const auto pairs = device_pairs(map.parties);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    j[pair_name(pairs[k].first, pairs[k].second)] = map.on[k] ? "ON" : "OFF";
  return j;
}

inline Json estimate_to_json(const Estimate& e) {
  return Json{{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

inline Json point_d_to_json(const PointD& p) {
  return Json{{"d", event_to_json(p.d)}, {"advantage", p.advantage}};
}

inline Json feasibility_to_json(const FeasibilityResult& r) {
  Json j;
  j["feasible"] = r.feasible;
  j["off_pair"] = pair_name(r.problem.off_pair.first, r.problem.off_pair.second);
  const Recheck rc = recheck(r);
  if (r.feasible) {
    j["witness"] = behavior_to_json(*r.witness);
    j["strategy_weights"] = r.strategy_weights;
    j["witness_residual"] = r.witness_residual;
  } else {
    j["certificate"] = {{"vector", r.certificate},
                        {"margin", r.certificate_margin},
                        {"inequality", r.certificate_text}};
  }
  j["recheck"] = {{"ok", rc.ok}, {"value", rc.value}, {"detail", rc.detail}};
  return j;
}

/// Report in the signaling schema. `time_unit_seconds` converts the
/// advantage window to seconds (1 for SI geometries, unset for c = 1).
inline Json ftl_report_to_json(const FtlReport& rep, std::optional<double> time_unit_seconds) {
  Json j;
  j["feasible"] = rep.feasible;
  if (rep.feasible) {
    j["witness"] = behavior_to_json(*rep.feasibility.witness);
  } else {
    j["certificate"] = {{"vector", rep.feasibility.certificate},
                        {"margin", rep.feasibility.certificate_margin},
                        {"inequality", rep.feasibility.certificate_text}};
  }
  const Recheck rc = recheck(rep.feasibility);
  j["recheck"] = {{"ok", rc.ok}, {"value", rc.value}, {"detail", rc.detail}};
  j["signaling_distance"] = rep.signaling_distance;
  j["single_receiver_distance"] = rep.single_receiver;
  j["settings"] = rep.settings;
  j["advantage"] = rep.point_d.advantage;
  if (time_unit_seconds)
    j["advantage_seconds"] = rep.point_d.advantage * *time_unit_seconds;
  else
    j["advantage_seconds"] = nullptr;
  j["point_d"] = event_to_json(rep.point_d.d);
  j["light_deficit_length"] = rep.light_deficit_length;
  j["bias"] = rep.bias;
  j["channel"] = rep.channel;
  j["statement"] = rep.statement;
  return j;
}

inline Json sweep_to_json(const SweepReport& rep) {
  Json j;
  Json stages = Json::array();
  for (const SweepStage& st : rep.stages) {
    Json s{{"family", st.family}, {"programs", st.programs}, {"infeasible", st.infeasible},
           {"best_score", st.best_score}};
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  j["rechecked"] = rep.rechecked;
  j["all_rechecks_pass"] = rep.all_rechecks_pass;
  if (rep.witness) {
    j["witness"] = {{"state", rep.witness->state},
                    {"settings", rep.witness->settings},
                    {"result", feasibility_to_json(rep.witness->result)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

}  // namespace localparts
