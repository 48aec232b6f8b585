#ifndef MARGINLAB_LP_HPP
#define MARGINLAB_LP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "marginlab/errors.hpp"

namespace marginlab {

/// Dense standard-form linear program:
///   maximize c^T x   subject to   A x = b,  x >= 0.
/// Row-major A of shape rows x cols. Intended for the margin LPs (at most a
/// few hundred variables), not as a general-purpose solver.
struct LpProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // rows * cols
  std::vector<double> b;  // rows
  std::vector<double> c;  // cols

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

/// Optimal basic solution with row duals. The primal-dual objective gap is
/// verified to be at most 1e-9 * (1 + |value|) before returning.
struct LpSolution {
  std::vector<double> x;
  std::vector<double> y;
  double value = 0.0;
};

namespace detail {

/// Dense LU with partial pivoting; factor once, solve many.
class Lu {
public:
  void factor(std::vector<double> m, std::size_t dim) {
    dim_ = dim;
    lu_ = std::move(m);
    perm_.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) perm_[i] = i;
    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < dim; ++r)
        if (std::fabs(lu_[r * dim + col]) > std::fabs(lu_[pivot * dim + col]))
          pivot = r;
      if (std::fabs(lu_[pivot * dim + col]) < 1e-300)
        throw NumericalError("singular basis matrix in LP solve");
      if (pivot != col) {
        for (std::size_t j = 0; j < dim; ++j)
          std::swap(lu_[pivot * dim + j], lu_[col * dim + j]);
        std::swap(perm_[pivot], perm_[col]);
      }
      const double inv = 1.0 / lu_[col * dim + col];
      for (std::size_t r = col + 1; r < dim; ++r) {
        const double f = lu_[r * dim + col] * inv;
        lu_[r * dim + col] = f;
        if (f == 0.0) continue;
        for (std::size_t j = col + 1; j < dim; ++j)
          lu_[r * dim + j] -= f * lu_[col * dim + j];
      }
    }
  }

  /// x = M^{-1} rhs
  std::vector<double> solve(const std::vector<double>& rhs) const {
    std::vector<double> x(dim_);
    for (std::size_t i = 0; i < dim_; ++i) x[i] = rhs[perm_[i]];
    for (std::size_t i = 1; i < dim_; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_[i * dim_ + j] * x[j];
    for (std::size_t i = dim_; i-- > 0;) {
      for (std::size_t j = i + 1; j < dim_; ++j)
        x[i] -= lu_[i * dim_ + j] * x[j];
      x[i] /= lu_[i * dim_ + i];
    }
    return x;
  }

  /// x = M^{-T} rhs, via U^T z = rhs then L^T w = z then x = P^T w.
  std::vector<double> solve_transposed(const std::vector<double>& rhs) const {
    std::vector<double> y(rhs);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < i; ++j) y[i] -= lu_[j * dim_ + i] * y[j];
      y[i] /= lu_[i * dim_ + i];
    }
    for (std::size_t i = dim_; i-- > 0;)
      for (std::size_t j = i + 1; j < dim_; ++j)
        y[i] -= lu_[j * dim_ + i] * y[j];
    std::vector<double> x(dim_);
    for (std::size_t i = 0; i < dim_; ++i) x[perm_[i]] = y[i];
    return x;
  }

private:
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
  std::size_t dim_ = 0;
};

inline std::vector<double> solve_dense(std::vector<double> m,
                                       const std::vector<double>& rhs,
                                       std::size_t dim) {
  Lu lu;
  lu.factor(std::move(m), dim);
  return lu.solve(rhs);
}

/// Tableau simplex on the internal minimization form. Pricing uses Dantzig's
/// rule until the objective stalls, then Bland's rule. The tableau is
/// refactorized from the original data at a fixed pivot cadence and at every
/// apparent optimum, so roundoff drift cannot accumulate into cycling.
class SimplexTableau {
public:
  explicit SimplexTableau(const LpProblem& p)
      : m_(p.rows), n_(p.cols), total_(p.cols + p.rows), row_sign_(p.rows, 1.0) {
    // internal form: min (-c)^T x over [A | I] with signed rows so b >= 0
    orig_.assign(m_ * (total_ + 1), 0.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = p.b[i] < 0.0 ? -1.0 : 1.0;
      row_sign_[i] = sign;
      for (std::size_t j = 0; j < n_; ++j)
        orig_[i * (total_ + 1) + j] = sign * p.at(i, j);
      orig_[i * (total_ + 1) + n_ + i] = 1.0;
      orig_[i * (total_ + 1) + total_] = sign * p.b[i];
      basis_[i] = n_ + i;
    }
    tab_ = orig_;
    cost_.assign(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = -p.c[j];
  }

  void solve() {
    std::vector<double> phase1_cost(total_, 0.0);
    for (std::size_t j = n_; j < total_; ++j) phase1_cost[j] = 1.0;
    phase_cost_ = &phase1_cost;
    load_objective();
    iterate(/*restrict_to_original=*/false);
    if (objective_value() > 1e-7)
      throw InfeasibleError("LP infeasible (phase-1 residual " +
                            std::to_string(objective_value()) + ")");
    drive_out_artificials();

    phase_cost_ = &cost_;
    load_objective();
    iterate(/*restrict_to_original=*/true);
    phase_cost_ = nullptr;
  }

  std::size_t rows() const { return m_; }
  std::size_t original_cols() const { return n_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  double row_sign(std::size_t i) const { return row_sign_[i]; }
  const std::vector<double>& internal_cost() const { return cost_; }

private:
  static constexpr std::size_t kRefactorEvery = 200;

  double& cell(std::size_t i, std::size_t j) { return tab_[i * (total_ + 1) + j]; }
  double cell(std::size_t i, std::size_t j) const { return tab_[i * (total_ + 1) + j]; }
  double& rhs(std::size_t i) { return tab_[i * (total_ + 1) + total_]; }
  double rhs(std::size_t i) const { return tab_[i * (total_ + 1) + total_]; }
  double& red(std::size_t j) { return obj_[j]; }
  double red(std::size_t j) const { return obj_[j]; }
  double objective_value() const { return -obj_[total_]; }

  void load_objective() {
    const std::vector<double>& cost = *phase_cost_;
    obj_.assign(total_ + 1, 0.0);
    for (std::size_t j = 0; j < total_; ++j) obj_[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= total_; ++j)
        obj_[j] -= cb * tab_[i * (total_ + 1) + j];
    }
  }

  /// Rebuild tab = B^{-1} [A_int | b_int] from the pristine copy, then the
  /// objective row. Clears accumulated pivot roundoff.
  void refactorize() {
    std::vector<double> bmat(m_ * m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t col = 0; col < m_; ++col)
        bmat[i * m_ + col] = orig_[i * (total_ + 1) + basis_[col]];
    Lu lu;
    lu.factor(std::move(bmat), m_);

    std::vector<double> column(m_);
    std::vector<double> solved;
    for (std::size_t j = 0; j <= total_; ++j) {
      for (std::size_t i = 0; i < m_; ++i)
        column[i] = orig_[i * (total_ + 1) + j];
      solved = lu.solve(column);
      for (std::size_t i = 0; i < m_; ++i) tab_[i * (total_ + 1) + j] = solved[i];
    }
    // basic feasibility can only be perturbed by roundoff; clamp tiny noise
    for (std::size_t i = 0; i < m_; ++i)
      if (rhs(i) < 0.0 && rhs(i) > -1e-9) rhs(i) = 0.0;
    load_objective();
  }

  void iterate(bool restrict_to_original) {
    const std::size_t limit = restrict_to_original ? n_ : total_;
    bool bland = false;
    std::size_t stalled = 0;
    std::size_t since_refactor = 0;
    double last_obj = objective_value();
    const std::size_t max_pivots = 500 * (m_ + total_) + 20000;
    for (std::size_t iter = 0; iter < max_pivots; ++iter) {
      std::size_t enter = total_;
      if (bland) {
        for (std::size_t j = 0; j < limit; ++j)
          if (red(j) < -1e-9) { enter = j; break; }
      } else {
        double best = -1e-9;
        for (std::size_t j = 0; j < limit; ++j)
          if (red(j) < best) { best = red(j); enter = j; }
      }
      if (enter == total_) {
        // confirm optimality against a freshly refactorized tableau
        if (since_refactor == 0) return;
        refactorize();
        since_refactor = 0;
        bool clean = true;
        for (std::size_t j = 0; j < limit && clean; ++j)
          if (red(j) < -1e-9) clean = false;
        if (clean) return;
        continue;
      }

      // two-pass ratio test: exact minimum first, then Bland tie-break
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = cell(i, enter);
        if (a > 1e-11) min_ratio = std::min(min_ratio, rhs(i) / a);
      }
      if (!std::isfinite(min_ratio))
        throw UnboundedError("LP unbounded along column " +
                             std::to_string(enter));
      const double window =
          1e-9 * std::max(1.0, std::fabs(min_ratio)) + 1e-12;
      std::size_t leave = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = cell(i, enter);
        if (a > 1e-11 && rhs(i) / a <= min_ratio + window)
          if (leave == m_ || basis_[i] < basis_[leave]) leave = i;
      }

      pivot(leave, enter);
      ++since_refactor;

      const double obj = objective_value();
      if (!std::isfinite(obj))
        throw NumericalError("simplex objective became non-finite");
      if (obj > last_obj - 1e-12) {
        if (++stalled > 50) bland = true;
      } else {
        stalled = 0;
      }
      last_obj = obj;

      if (since_refactor >= kRefactorEvery) {
        refactorize();
        since_refactor = 0;
        last_obj = objective_value();
      }
    }
    throw NumericalError("simplex exceeded its pivot budget");
  }

  void pivot(std::size_t leave, std::size_t enter) {
    const double inv = 1.0 / cell(leave, enter);
    double* lrow = &tab_[leave * (total_ + 1)];
    for (std::size_t j = 0; j <= total_; ++j) lrow[j] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leave) continue;
      const double f = cell(i, enter);
      if (f == 0.0) continue;
      double* row = &tab_[i * (total_ + 1)];
      for (std::size_t j = 0; j <= total_; ++j) row[j] -= f * lrow[j];
    }
    const double fo = obj_[enter];
    if (fo != 0.0)
      for (std::size_t j = 0; j <= total_; ++j) obj_[j] -= fo * lrow[j];
    basis_[leave] = enter;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j)
        if (std::fabs(cell(i, j)) > 1e-9) { enter = j; break; }
      if (enter < n_) pivot(i, enter);
      // otherwise the row is redundant; the artificial stays basic at zero
    }
  }

  std::size_t m_, n_, total_;
  std::vector<double> orig_;  // pristine internal [A | I | b]
  std::vector<double> tab_;
  std::vector<double> obj_;   // reduced-cost row, tracked separately
  std::vector<std::size_t> basis_;
  std::vector<double> row_sign_;
  std::vector<double> cost_;
  const std::vector<double>* phase_cost_ = nullptr;
};

}  // namespace detail

/// Two-phase dense simplex. Throws InfeasibleError / UnboundedError; on
/// success the returned solution satisfies the stated primal-dual gap bound.
inline LpSolution solve_lp(const LpProblem& p) {
  if (p.rows == 0 || p.cols == 0 || p.a.size() != p.rows * p.cols ||
      p.b.size() != p.rows || p.c.size() != p.cols)
    throw InvalidInputError("solve_lp: inconsistent problem dimensions");

  detail::SimplexTableau tableau(p);
  tableau.solve();

  const std::size_t m = p.rows;
  const auto& basis = tableau.basis();

  // Final answers come from a fresh factorization of the basis system, not
  // from the iterated tableau. Artificial basis columns (possible only on
  // redundant rows) are signed unit vectors.
  std::vector<double> bmat(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t col = 0; col < m; ++col) {
      const std::size_t j = basis[col];
      bmat[i * m + col] =
          j < p.cols ? p.at(i, j) : (i == (j - p.cols) ? tableau.row_sign(i) : 0.0);
    }
  detail::Lu lu;
  lu.factor(bmat, m);

  const std::vector<double> xb = lu.solve(p.b);
  LpSolution sol;
  sol.x.assign(p.cols, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < p.cols) sol.x[basis[i]] = xb[i];

  // duals: B^T y = c_B in the internal min form, then flip sign for max
  std::vector<double> cb(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < p.cols) cb[i] = tableau.internal_cost()[basis[i]];
  const std::vector<double> y_int = lu.solve_transposed(cb);
  sol.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.y[i] = -y_int[i];

  double primal = 0.0;
  for (std::size_t j = 0; j < p.cols; ++j) primal += p.c[j] * sol.x[j];
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) dual += p.b[i] * sol.y[i];
  sol.value = primal;
  if (std::fabs(primal - dual) > 1e-9 * (1.0 + std::fabs(primal)))
    throw NumericalError("LP primal-dual gap too large: " +
                         std::to_string(std::fabs(primal - dual)));
  return sol;
}

}  // namespace marginlab

#endif  // MARGINLAB_LP_HPP
