#pragma once

// Dense two-phase simplex for small linear programs in equality form
//
//     maximize c^T x   subject to   A x = b,  x >= 0.
//
// Infeasible problems come back with a Farkas certificate y satisfying
// A^T y <= 0 and b^T y > 0; optimal problems carry the dual solution.
// Sizes in this project stay below a few hundred rows and columns, so the
// full tableau (including the artificial block, which doubles as B^-1) is
// kept in memory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace localparts::lp {

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Problem {
  Matrix A;
  std::vector<double> b;
  std::vector<double> c;  // empty means pure feasibility

  std::size_t rows() const { return A.rows(); }
  std::size_t cols() const { return A.cols(); }
};

enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;       // primal solution (optimal only)
  std::vector<double> dual;    // y with A^T y >= c at optimum
  std::vector<double> farkas;  // infeasible only: A^T y <= 0, b^T y > 0
  double phase1_residual = 0.0;  // minimum total constraint violation
  int pivots = 0;
};

struct Options {
  double pivot_tolerance = 1e-9;
  double cost_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  int max_pivots = 200000;
};

namespace detail {

class Tableau {
 public:
  // Columns: [0, n) structural, [n, n+m) artificial, n+m = rhs.
  Tableau(const Problem& p, std::vector<double>& row_sign)
      : m_(p.rows()), n_(p.cols()), t_(m_ + 1, n_ + m_ + 1), basis_(m_) {
    row_sign.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double s = p.b[i] < 0.0 ? -1.0 : 1.0;
      row_sign[i] = s;
      for (std::size_t j = 0; j < n_; ++j) t_(i, j) = s * p.A(i, j);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = s * p.b[i];
      basis_[i] = n_ + i;
    }
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::size_t rhs() const { return n_ + m_; }
  std::size_t obj() const { return m_; }
  Matrix& t() { return t_; }
  const Matrix& t() const { return t_; }
  std::vector<std::size_t>& basis() { return basis_; }

  // Objective row holds reduced costs d_j = c_j - c_B B^-1 A_j (maximize);
  // the rhs entry holds -(current objective value).
  void set_objective(const std::vector<double>& cost) {
    double* z = t_.row(obj());
    for (std::size_t j = 0; j <= rhs(); ++j) z[j] = j < cost.size() ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = basis_[i] < cost.size() ? cost[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      const double* r = t_.row(i);
      for (std::size_t j = 0; j <= rhs(); ++j) z[j] -= cb * r[j];
    }
  }

  void pivot(std::size_t r, std::size_t col) {
    double* pr = t_.row(r);
    const double inv = 1.0 / pr[col];
    for (std::size_t j = 0; j <= rhs(); ++j) pr[j] *= inv;
    pr[col] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* ri = t_.row(i);
      const double f = ri[col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= rhs(); ++j) ri[j] -= f * pr[j];
      ri[col] = 0.0;
    }
    basis_[r] = col;
  }

  // Runs primal simplex on the current objective over columns [0, limit).
  // Dantzig pricing, switching to Bland's rule after a run of degenerate
  // pivots. Returns false when unbounded.
  bool optimize(std::size_t limit, const Options& opt, int& pivots) {
    int degenerate = 0;
    while (true) {
      const double* z = t_.row(obj());
      const bool bland = degenerate > 50;
      std::size_t enter = limit;
      double best = opt.cost_tolerance;
      for (std::size_t j = 0; j < limit; ++j) {
        if (z[j] > best) {
          enter = j;
          if (bland) break;
          best = z[j];
        }
      }
      if (enter == limit) return true;

      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt.pivot_tolerance) continue;
        const double q = std::max(0.0, t_(i, rhs())) / a;
        if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave < m_ && basis_[i] < basis_[leave])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave == m_) return false;
      degenerate = ratio <= 1e-15 ? degenerate + 1 : 0;
      pivot(leave, enter);
      if (++pivots > opt.max_pivots) throw std::runtime_error("simplex: pivot limit exceeded");
    }
  }

  // y_i = c_B B^-1 e_i, read from the artificial block.
  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = basis_[r] < cost.size() ? cost[basis_[r]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) y[i] += cb * t_(r, n_ + i);
    }
    return y;
  }

 private:
  std::size_t m_, n_;
  Matrix t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Result solve(const Problem& p, const Options& opt = {}) {
  if (p.b.size() != p.rows()) throw std::invalid_argument("lp: b has wrong size");
  if (!p.c.empty() && p.c.size() != p.cols()) throw std::invalid_argument("lp: c has wrong size");

  std::vector<double> sign;
  detail::Tableau tab(p, sign);
  const std::size_t m = tab.m();
  const std::size_t n = tab.n();
  Result res;

  // Phase I: maximize -sum(artificials).
  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = -1.0;
  tab.set_objective(phase1);
  tab.optimize(n + m, opt, res.pivots);
  res.phase1_residual = std::max(0.0, tab.t()(tab.obj(), tab.rhs()));

  if (res.phase1_residual > opt.feasibility_tolerance) {
    res.status = Status::infeasible;
    // Reduced costs of structural columns are <= 0, i.e. y^T A_j >= 0 with
    // y the phase-I duals and y^T b = -residual < 0. Negate and undo the row
    // sign flips.
    std::vector<double> y = tab.duals(phase1);
    res.farkas.resize(m);
    for (std::size_t i = 0; i < m; ++i) res.farkas[i] = -y[i] * sign[i];
    return res;
  }

  // Drive zero-level artificials out of the basis; rows where that is
  // impossible are redundant and stay inert.
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) continue;
    std::size_t best = n;
    double mag = opt.pivot_tolerance;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::abs(tab.t()(r, j));
      if (a > mag) {
        mag = a;
        best = j;
      }
    }
    if (best < n) tab.pivot(r, best);
  }

  std::vector<double> cost(n + m, 0.0);
  std::copy(p.c.begin(), p.c.end(), cost.begin());
  tab.set_objective(cost);
  if (!p.c.empty() && !tab.optimize(n, opt, res.pivots)) {
    res.status = Status::unbounded;
    return res;
  }

  res.status = Status::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis()[r] < n) res.x[tab.basis()[r]] = std::max(0.0, tab.t()(r, tab.rhs()));
  double obj = 0.0;
  for (std::size_t j = 0; j < p.c.size(); ++j) obj += p.c[j] * res.x[j];
  res.objective = obj;
  std::vector<double> y = tab.duals(cost);
  res.dual.resize(m);
  for (std::size_t i = 0; i < m; ++i) res.dual[i] = y[i] * sign[i];
  return res;
}

/// max_i |(A x - b)_i| together with the most negative entry of x.
inline double primal_residual(const Problem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = -p.b[i];
    const double* a = p.A.row(i);
    for (std::size_t j = 0; j < p.cols(); ++j) s += a[j] * x[j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

/// Contradiction margin of a Farkas vector for a system whose variables are
/// known to lie in [0, upper]: b^T y - upper * sum_j max(0, (A^T y)_j),
/// after scaling y to unit max-norm. Positive means A x = b has no solution
/// in the box.
inline double farkas_margin(const Problem& p, const std::vector<double>& y, double upper = 1.0) {
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return -std::numeric_limits<double>::infinity();
  double by = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) by += p.b[i] * y[i];
  double slack = 0.0;
  for (std::size_t j = 0; j < p.cols(); ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) aty += p.A(i, j) * y[i];
    slack += std::max(0.0, aty);
  }
  return (by - upper * slack) / scale;
}

}  // namespace localparts::lp
