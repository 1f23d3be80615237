#pragma once

// Setting-dependence of marginals and the linear programs behind it:
// membership in the bipartite local polytope, and whether a tripartite
// target can be reproduced by a no-signaling model whose B-C part is local
// (shared randomness) while the hub-B and hub-C marginals stay exact.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "localparts/behavior.hpp"
#include "localparts/hvmodels.hpp"
#include "localparts/lp.hpp"
#include "localparts/quantum.hpp"
#include "localparts/spacetime.hpp"

namespace localparts {

inline constexpr double kLpTolerance = 1e-9;

/// Largest total-variation distance between the marginals of `receivers`
/// at two different setting tuples of the remaining parties, maximized over
/// the receivers' own settings. Zero means the rest cannot signal to them.
inline double signaling_distance(const Behavior& b, std::vector<int> receivers) {
  const MarginalFamily fam = marginal(b, std::move(receivers));
  double worst = 0.0;
  const Behavior& first = fam.members.front();
  for (std::size_t r = 0; r < first.num_setting_tuples(); ++r) {
    for (std::size_t c1 = 0; c1 < fam.size(); ++c1) {
      for (std::size_t c2 = c1 + 1; c2 < fam.size(); ++c2) {
        double tv = 0.0;
        for (std::size_t o = 0; o < first.num_outcomes(); ++o)
          tv += std::abs(fam[c1].at(r, o) - fam[c2].at(r, o));
        worst = std::max(worst, 0.5 * tv);
      }
    }
  }
  return worst;
}

/// Largest signaling distance over every proper subset of parties.
inline double no_signaling_violation(const Behavior& b) {
  const int n = b.parties();
  double worst = 0.0;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> subset;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) subset.push_back(k);
    worst = std::max(worst, signaling_distance(b, subset));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Bipartite local polytope

/// Bell-type inequality sum_r coeff[r] * P_r <= bound over the table entries
/// of a bipartite behavior, with the target's value and its excess.
struct BellCertificate {
  std::vector<int> settings_per_party;
  std::vector<double> coefficients;  // same layout as Behavior::table()
  double bound = 0.0;                // max over deterministic strategies (re-enumerated)
  double value = 0.0;                // on the tested behavior
  double margin = 0.0;               // value - bound

  std::string to_string() const;
};

struct LocalMembership {
  bool member = false;
  std::vector<double> weights;  // over deterministic strategies (member only)
  double residual = 0.0;        // re-checked |sum w v - p|
  std::optional<BellCertificate> certificate;
};

inline constexpr int kMaxPolytopeSettings = 4;

namespace detail {

// Deterministic bipartite strategy k: party 0 answers bit ((k >> (m1 + y)) & 1)
// at setting y, party 1 answers bit ((k >> z) & 1) at setting z.
inline double vertex_entry(const Behavior& shape, std::size_t k, std::size_t setting, std::size_t outcome) {
  const int m1 = shape.settings_per_party()[1];
  const std::vector<int> t = shape.setting_tuple(setting);
  const int a = static_cast<int>((k >> (m1 + t[0])) & 1u);
  const int b = static_cast<int>((k >> t[1]) & 1u);
  return (shape.outcome_bit_of(outcome, 0) == a && shape.outcome_bit_of(outcome, 1) == b) ? 1.0 : 0.0;
}

inline std::size_t vertex_count(const Behavior& shape) {
  return std::size_t{1} << (shape.settings_per_party()[0] + shape.settings_per_party()[1]);
}

}  // namespace detail

inline std::string BellCertificate::to_string() const {
  Behavior shape(settings_per_party);
  std::ostringstream os;
  os << std::setprecision(6);
  bool first = true;
  for (std::size_t s = 0; s < shape.num_setting_tuples(); ++s) {
    const std::vector<int> t = shape.setting_tuple(s);
    for (std::size_t o = 0; o < shape.num_outcomes(); ++o) {
      const double c = coefficients[s * shape.num_outcomes() + o];
      if (std::abs(c) < 1e-9) continue;
      os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + ")) << std::abs(c) << "*P("
         << (shape.outcome_bit_of(o, 0) ? '-' : '+') << (shape.outcome_bit_of(o, 1) ? '-' : '+') << '|'
         << t[0] << t[1] << ')';
      first = false;
    }
  }
  if (first) os << "0";
  os << " <= " << bound << "  (tested value " << value << ", excess " << margin << ")";
  return os.str();
}

/// Maximum of coeff . v over deterministic strategies, by enumeration.
inline double deterministic_max(const BellCertificate& cert) {
  Behavior shape(cert.settings_per_party);
  double best = -INFINITY;
  for (std::size_t k = 0; k < detail::vertex_count(shape); ++k) {
    double v = 0.0;
    for (std::size_t s = 0; s < shape.num_setting_tuples(); ++s)
      for (std::size_t o = 0; o < shape.num_outcomes(); ++o)
        v += cert.coefficients[s * shape.num_outcomes() + o] * detail::vertex_entry(shape, k, s, o);
    best = std::max(best, v);
  }
  return best;
}

/// Decides whether a bipartite behavior is a convex mixture of deterministic
/// local strategies. Members come with mixture weights; non-members with the
/// maximally violated inequality among those with coefficients in [-1, 1].
inline LocalMembership local_polytope_member(const Behavior& bc) {
  if (bc.parties() != 2) throw std::invalid_argument("local_polytope_member: behavior must be bipartite");
  for (int m : bc.settings_per_party())
    if (m > kMaxPolytopeSettings)
      throw std::invalid_argument("local_polytope_member: at most 4 settings per party");

  const std::size_t rows = bc.table().size();
  const std::size_t verts = detail::vertex_count(bc);
  LocalMembership out;

  lp::Problem primal;
  primal.A = lp::Matrix(rows, verts);
  primal.b = bc.table();
  for (std::size_t s = 0; s < bc.num_setting_tuples(); ++s)
    for (std::size_t o = 0; o < bc.num_outcomes(); ++o)
      for (std::size_t k = 0; k < verts; ++k)
        primal.A(s * bc.num_outcomes() + o, k) = detail::vertex_entry(bc, k, s, o);
  const lp::Result pr = lp::solve(primal);
  if (pr.status == lp::Status::optimal) {
    out.residual = lp::primal_residual(primal, pr.x);
    if (out.residual <= kLpTolerance) {
      out.member = true;
      out.weights = pr.x;
      return out;
    }
  }

  // Separation: maximize c.p - beta subject to c.v_k <= beta for every
  // vertex and -1 <= c_r <= 1. Columns: u_r = c_r + 1 in [0, 2], slack of
  // u_r <= 2, beta+, beta-, one slack per vertex.
  const std::size_t nu = rows;
  const std::size_t col_bp = 2 * nu;
  const std::size_t col_bm = col_bp + 1;
  const std::size_t col_vs = col_bm + 1;
  lp::Problem sep;
  sep.A = lp::Matrix(nu + verts, col_vs + verts);
  sep.b.assign(nu + verts, 0.0);
  sep.c.assign(col_vs + verts, 0.0);
  for (std::size_t r = 0; r < nu; ++r) {
    sep.A(r, r) = 1.0;
    sep.A(r, nu + r) = 1.0;
    sep.b[r] = 2.0;
    sep.c[r] = bc.table()[r];
  }
  sep.c[col_bp] = -1.0;
  sep.c[col_bm] = 1.0;
  for (std::size_t k = 0; k < verts; ++k) {
    const std::size_t row = nu + k;
    double ones = 0.0;
    for (std::size_t s = 0; s < bc.num_setting_tuples(); ++s)
      for (std::size_t o = 0; o < bc.num_outcomes(); ++o) {
        const double v = detail::vertex_entry(bc, k, s, o);
        sep.A(row, s * bc.num_outcomes() + o) = v;
        ones += v;
      }
    sep.A(row, col_bp) = -1.0;
    sep.A(row, col_bm) = 1.0;
    sep.A(row, col_vs + k) = 1.0;
    sep.b[row] = ones;
  }
  const lp::Result sr = lp::solve(sep);
  if (sr.status != lp::Status::optimal)
    throw std::runtime_error("local_polytope_member: separation program did not solve");

  BellCertificate cert;
  cert.settings_per_party = bc.settings_per_party();
  cert.coefficients.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double c = std::clamp(sr.x[r] - 1.0, -1.0, 1.0);
    cert.coefficients[r] = std::abs(c) < 1e-12 ? 0.0 : c;
  }
  cert.bound = deterministic_max(cert);
  for (std::size_t r = 0; r < rows; ++r) cert.value += cert.coefficients[r] * bc.table()[r];
  cert.margin = cert.value - cert.bound;
  out.member = !(cert.margin > kLpTolerance);
  out.certificate = cert;
  return out;
}

// ---------------------------------------------------------------------------
// Local parts feasibility

/// The linear system behind `localparts_feasible`, kept so that witnesses and
/// certificates can be re-checked against it.
struct FeasibilityProblem {
  int hub = 0;
  std::pair<int, int> off_pair{1, 2};
  std::vector<int> settings_per_party;
  std::size_t q_columns = 0;         // Q(o | s), tuple-major
  std::size_t strategy_columns = 0;  // convex weights over deterministic (i, j) strategies
  std::vector<std::string> row_labels;
  lp::Problem system;  // A x = b, x >= 0; every variable also lies in [0, 1]
};

struct FeasibilityResult {
  bool feasible = false;
  FeasibilityProblem problem;
  std::optional<Behavior> witness;          // Q
  std::vector<double> strategy_weights;     // w over off-pair strategies
  double witness_residual = 0.0;            // re-checked
  std::vector<double> certificate;          // Farkas vector (infeasible only)
  double certificate_margin = 0.0;          // re-checked, > 0 proves infeasibility
  double phase1_residual = 0.0;             // minimum total violation, a continuous score
  std::string certificate_text;
};

inline constexpr int kMaxFeasibilitySettings = 3;

namespace detail {

inline std::string marginal_label(char p1, char p2, int o1, int o2, const std::vector<int>& tuple) {
  std::ostringstream os;
  os << "P_" << p1 << p2 << '(' << (o1 ? '-' : '+') << (o2 ? '-' : '+') << '|';
  for (int v : tuple) os << v;
  os << ')';
  return os.str();
}

}  // namespace detail

/// Builds the program: unknowns Q(abc|xyz) >= 0 and weights w_l >= 0 over
/// deterministic strategies l of the off pair, with
///   sum_{o_j} Q = T_{hub,i}   for every full setting tuple,
///   sum_{o_i} Q = T_{hub,j}   for every full setting tuple,
///   sum_{o_hub} Q = sum_l w_l [o_i = l_i(s_i)] [o_j = l_j(s_j)].
/// Together these make Q no-signaling, keep its off-pair marginal
/// independent of the hub's setting, and put that marginal in the local
/// polytope.
inline FeasibilityProblem build_feasibility_problem(const Behavior& target, std::pair<int, int> off_pair) {
  if (target.parties() != 3) throw std::invalid_argument("localparts_feasible: target must be tripartite");
  auto [i, j] = off_pair;
  if (i > j) std::swap(i, j);
  if (i < 0 || j > 2 || i == j) throw std::invalid_argument("localparts_feasible: invalid off pair");
  for (int m : target.settings_per_party())
    if (m > kMaxFeasibilitySettings)
      throw std::invalid_argument("localparts_feasible: at most 3 settings per party");
  const int hub = 3 - i - j;

  FeasibilityProblem fp;
  fp.hub = hub;
  fp.off_pair = {i, j};
  fp.settings_per_party = target.settings_per_party();
  const std::size_t T = target.num_setting_tuples();
  const std::size_t no = target.num_outcomes();
  const int mi = target.settings_per_party()[static_cast<std::size_t>(i)];
  const int mj = target.settings_per_party()[static_cast<std::size_t>(j)];
  fp.q_columns = T * no;
  fp.strategy_columns = std::size_t{1} << (mi + mj);
  const std::size_t cols = fp.q_columns + fp.strategy_columns;
  const std::size_t rows = 3 * T * 4;
  fp.system.A = lp::Matrix(rows, cols);
  fp.system.b.assign(rows, 0.0);
  fp.row_labels.resize(rows);

  const char L[3] = {'A', 'B', 'C'};
  // (kept party 1, kept party 2) for the three row blocks; the summed party
  // is the remaining one.
  const std::array<std::pair<int, int>, 3> blocks{{{std::min(hub, i), std::max(hub, i)},
                                                   {std::min(hub, j), std::max(hub, j)},
                                                   {i, j}}};
  std::size_t row = 0;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    const auto [p1, p2] = blocks[blk];
    for (std::size_t s = 0; s < T; ++s) {
      const std::vector<int> tuple = target.setting_tuple(s);
      for (int o1 = 0; o1 < 2; ++o1) {
        for (int o2 = 0; o2 < 2; ++o2, ++row) {
          double rhs = 0.0;
          for (std::size_t o = 0; o < no; ++o) {
            if (target.outcome_bit_of(o, p1) != o1 || target.outcome_bit_of(o, p2) != o2) continue;
            fp.system.A(row, s * no + o) = 1.0;
            rhs += target.at(s, o);
          }
          if (blk < 2) {
            fp.system.b[row] = rhs;
          } else {
            for (std::size_t l = 0; l < fp.strategy_columns; ++l) {
              const int ai = static_cast<int>((l >> (mj + tuple[static_cast<std::size_t>(i)])) & 1u);
              const int aj = static_cast<int>((l >> tuple[static_cast<std::size_t>(j)]) & 1u);
              if (ai == o1 && aj == o2) fp.system.A(row, fp.q_columns + l) = -1.0;
            }
          }
          std::vector<int> lbl{tuple.begin(), tuple.end()};
          fp.row_labels[row] = (blk < 2 ? "" : "local:") + detail::marginal_label(L[p1], L[p2], o1, o2, lbl);
        }
      }
    }
  }
  return fp;
}

/// Human-readable form of a Farkas certificate: a linear functional of the
/// target's hub pair marginals that is <= 0 for every local-parts model.
inline std::string certificate_to_string(const FeasibilityProblem& fp, const std::vector<double>& y, double margin) {
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  std::vector<std::pair<double, std::size_t>> terms;
  for (std::size_t r = 0; r < y.size(); ++r)
    if (std::abs(fp.system.b[r]) > 0.0 && std::abs(y[r]) > 1e-9 * scale) terms.emplace_back(y[r] / scale, r);
  std::ostringstream os;
  os << std::setprecision(6);
  bool first = true;
  for (const auto& [coef, r] : terms) {
    os << (coef < 0 ? (first ? "-" : " - ") : (first ? "" : " + ")) << std::abs(coef) << '*' << fp.row_labels[r];
    first = false;
  }
  if (first) os << "0";
  os << " <= 0 for every local-parts model (target excess " << margin << ")";
  return os.str();
}

/// Can a no-signaling model reproduce the target's hub-i and hub-j marginals
/// while the off pair (i, j) is only locally correlated and blind to the
/// hub's setting? Infeasible means every such model makes the off pair's
/// joint marginal depend on the hub's setting.
inline FeasibilityResult localparts_feasible(const Behavior& target, std::pair<int, int> off_pair) {
  target.check();
  FeasibilityResult res;
  res.problem = build_feasibility_problem(target, off_pair);
  const lp::Problem& sys = res.problem.system;
  const lp::Result r = lp::solve(sys);
  res.phase1_residual = r.phase1_residual;

  if (r.status == lp::Status::optimal) {
    res.witness_residual = lp::primal_residual(sys, r.x);
    res.feasible = true;
    std::vector<double> q(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(res.problem.q_columns));
    res.witness = Behavior(target.settings_per_party(), std::move(q));
    res.strategy_weights.assign(r.x.begin() + static_cast<std::ptrdiff_t>(res.problem.q_columns), r.x.end());
    return res;
  }
  res.feasible = false;
  res.certificate = r.farkas;
  res.certificate_margin = lp::farkas_margin(sys, r.farkas, 1.0);
  res.certificate_text = certificate_to_string(res.problem, r.farkas, res.certificate_margin);
  return res;
}

/// Independent re-check of a feasibility result. For witnesses: the linear
/// system, distribution validity, no-signaling, and locality of the off-pair
/// marginal. For certificates: the contradiction margin. Returns the slack
/// (positive = passes) and writes a reason on failure.
struct Recheck {
  bool ok = false;
  double value = 0.0;
  std::string detail;
};

inline Recheck recheck(const FeasibilityResult& res) {
  Recheck out;
  if (!res.feasible) {
    out.value = lp::farkas_margin(res.problem.system, res.certificate, 1.0);
    out.ok = out.value > kLpTolerance;
    out.detail = out.ok ? "certificate margin positive" : "certificate margin not positive";
    return out;
  }
  std::vector<double> x = res.witness->table();
  x.insert(x.end(), res.strategy_weights.begin(), res.strategy_weights.end());
  const double lin = lp::primal_residual(res.problem.system, x);
  const double norm = res.witness->normalization_error();
  const double ns = no_signaling_violation(*res.witness);
  const auto [i, j] = res.problem.off_pair;
  const LocalMembership pair_local = local_polytope_member(averaged_marginal(*res.witness, {i, j}));
  out.value = std::max({lin, norm, ns});
  out.ok = out.value <= kLpTolerance && pair_local.member;
  std::ostringstream os;
  os << "linear " << lin << ", normalization " << norm << ", no-signaling " << ns << ", off-pair local "
     << (pair_local.member ? "yes" : "no");
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Settings search

struct SweepPoint {
  std::string state;                          // label of the state
  std::vector<std::vector<double>> settings;  // angles per party
  FeasibilityResult result;
};

struct SweepStage {
  std::string family;
  std::size_t programs = 0;
  std::size_t infeasible = 0;
  double best_score = 0.0;  // largest phase-I residual seen
  std::optional<SweepPoint> best;
};

struct SweepReport {
  std::vector<SweepStage> stages;
  std::optional<SweepPoint> witness;  // first stage's best infeasible point, if any
  bool all_rechecks_pass = true;
  std::size_t rechecked = 0;
};

struct SweepOptions {
  int grid = 16;              // angles per party
  int refinement_steps = 24;  // pattern-search halvings around the best point
  std::vector<double> family_alphas{std::numbers::pi / 16, std::numbers::pi / 8, 3 * std::numbers::pi / 16,
                                    5 * std::numbers::pi / 16, 3 * std::numbers::pi / 8};
};

namespace detail {

// Party k measures at {0, phi_k}.
inline std::vector<std::vector<double>> two_settings(const std::array<double, 3>& phi) {
  return {{0.0, phi[0]}, {0.0, phi[1]}, {0.0, phi[2]}};
}

inline SweepStage sweep_state(const StateVector& state, const std::string& label, std::pair<int, int> off_pair,
                              const SweepOptions& opt, SweepReport& report) {
  SweepStage stage;
  stage.family = label;
  auto evaluate = [&](const std::array<double, 3>& phi) {
    SweepPoint pt;
    pt.state = label;
    pt.settings = two_settings(phi);
    pt.result = localparts_feasible(born_behavior(state, pt.settings), off_pair);
    ++stage.programs;
    const Recheck rc = recheck(pt.result);
    ++report.rechecked;
    if (!rc.ok) report.all_rechecks_pass = false;
    if (!pt.result.feasible) ++stage.infeasible;
    return pt;
  };
  auto score = [](const SweepPoint& p) { return p.result.feasible ? 0.0 : p.result.phase1_residual; };

  std::array<double, 3> best_phi{};
  double best = -1.0;
  for (int g0 = 1; g0 <= opt.grid; ++g0)
    for (int g1 = 1; g1 <= opt.grid; ++g1)
      for (int g2 = 1; g2 <= opt.grid; ++g2) {
        const double step = std::numbers::pi / opt.grid;
        const std::array<double, 3> phi{g0 * step, g1 * step, g2 * step};
        SweepPoint pt = evaluate(phi);
        const double sc = score(pt);
        if (sc > best) {
          best = sc;
          best_phi = phi;
          stage.best = std::move(pt);
        }
      }

  if (best > 0.0) {
    double step = 0.5 * std::numbers::pi / opt.grid;
    for (int it = 0; it < opt.refinement_steps; ++it, step *= 0.5) {
      bool improved = false;
      for (int k = 0; k < 3; ++k)
        for (double dir : {-1.0, 1.0}) {
          std::array<double, 3> phi = best_phi;
          phi[static_cast<std::size_t>(k)] += dir * step;
          SweepPoint pt = evaluate(phi);
          const double sc = score(pt);
          if (sc > best) {
            best = sc;
            best_phi = phi;
            stage.best = std::move(pt);
            improved = true;
          }
        }
      if (improved) step *= 2.0;
    }
  }
  stage.best_score = std::max(0.0, best);
  return stage;
}

}  // namespace detail

/// Looks for settings at which no local-parts model can avoid signaling to
/// the off pair. GHZ3 is tried first; if every program there is feasible the
/// search continues over cos(a)|000> + sin(a)|111>. Findings are reported
/// as they are, including "nothing found".
inline SweepReport localparts_settings_sweep(std::pair<int, int> off_pair = {1, 2}, const SweepOptions& opt = {}) {
  SweepReport report;
  report.stages.push_back(detail::sweep_state(make_ghz3(), "ghz3", off_pair, opt, report));
  if (report.stages.back().infeasible == 0) {
    for (double alpha : opt.family_alphas) {
      std::ostringstream label;
      label << "weighted_ghz3(alpha=" << std::setprecision(6) << alpha << ")";
      report.stages.push_back(detail::sweep_state(make_weighted_ghz3(alpha), label.str(), off_pair, opt, report));
      if (report.stages.back().infeasible > 0) break;
    }
  }
  for (const SweepStage& st : report.stages)
    if (st.infeasible > 0 && st.best) {
      report.witness = st.best;
      break;
    }
  return report;
}

// ---------------------------------------------------------------------------
// Faster-than-light protocol report

struct FtlReport {
  bool feasible = false;
  FeasibilityResult feasibility;
  double signaling_distance = 0.0;      // hub setting -> off-pair joint marginal
  std::vector<double> single_receiver;  // each off-pair member alone
  double bias = 0.0;                    // signaling_distance / 2 per use
  bool channel = false;
  PointD point_d;
  double light_deficit_length = 0.0;    // c * advantage
  std::vector<std::vector<double>> settings;
  std::string statement;
};

class MissingIngredient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Composes the constructive off-pair model (hub setting shifts the off
/// pair's joint marginal) with the point-D geometry of the three devices.
inline FtlReport ftl_protocol_report(const Behavior& target, std::pair<int, int> off_pair, const Geometry& g,
                                     std::vector<std::vector<double>> settings = {}) {
  if (target.parties() != 3 || g.parties() != 3)
    throw std::invalid_argument("ftl_protocol_report: tripartite target and geometry required");
  g.validate();
  auto [i, j] = off_pair;
  if (i > j) std::swap(i, j);
  const int hub = 3 - i - j;

  FtlReport rep;
  rep.settings = std::move(settings);
  const auto pd = find_point_d(g.devices[static_cast<std::size_t>(hub)], g.devices[static_cast<std::size_t>(i)],
                               g.devices[static_cast<std::size_t>(j)], g.c);
  if (!pd) throw MissingIngredient("ftl_protocol_report: no point D exists for this geometry");
  rep.point_d = *pd;
  rep.light_deficit_length = g.c * pd->advantage;

  CoordinationMap map = CoordinationMap::all(3, true);
  const auto pairs = device_pairs(3);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k] == std::make_pair(i, j)) map.on[k] = false;
  const Behavior model = behavior_under(map, target);
  rep.signaling_distance = signaling_distance(model, {i, j});
  rep.single_receiver = {signaling_distance(model, {i}), signaling_distance(model, {j})};
  rep.bias = 0.5 * rep.signaling_distance;
  rep.channel = rep.signaling_distance > kLpTolerance;

  rep.feasibility = localparts_feasible(target, {i, j});
  rep.feasible = rep.feasibility.feasible;

  std::ostringstream os;
  os << std::setprecision(6);
  if (!rep.channel) {
    os << "no channel: the off-pair joint marginal does not depend on " << party_letter(hub) << "'s setting";
  } else {
    os << party_letter(hub) << " shifts the " << party_letter(i) << party_letter(j)
       << " joint marginal by total variation " << rep.signaling_distance << " (bias " << rep.bias
       << " per use); an observer at D receives it " << pd->advantage
       << " time units before light from " << party_letter(hub) << " arrives; neither " << party_letter(i)
       << " nor " << party_letter(j) << " alone sees any dependence (max "
       << std::max(rep.single_receiver[0], rep.single_receiver[1]) << ")";
  }
  rep.statement = os.str();
  return rep;
}

}  // namespace localparts
