#ifndef MARGINLAB_MARGINS_HPP
#define MARGINLAB_MARGINS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "marginlab/dataset.hpp"
#include "marginlab/errors.hpp"
#include "marginlab/lp.hpp"

namespace marginlab {

enum class MarginNorm { kLinf, kL2 };

inline std::string to_string(MarginNorm n) {
  return n == MarginNorm::kLinf ? "linf" : "l2";
}

/// Certified maximum-margin solution. For linf the dual witness is a simplex
/// vector r with ||Z^T r||_1 == gamma at optimality, which certifies the
/// primal value from both sides. The direction is one optimal vertex; it is
/// not claimed to be unique.
struct MarginCertificate {
  MarginNorm norm = MarginNorm::kLinf;
  double gamma = 0.0;
  std::vector<double> direction;
  std::vector<double> dual_witness;  // empty for l2
  double residual = 0.0;
  bool separable = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["norm"] = to_string(norm);
    j["gamma"] = gamma;
    j["direction"] = direction;
    if (norm == MarginNorm::kLinf)
      j["dual_witness"] = dual_witness;
    else
      j["dual_witness"] = nullptr;
    j["residual"] = residual;
    j["separable"] = separable;
    return j;
  }
};

/// min_i <w, z_i> / ||w||; scale-invariant progress measure.
inline double normalized_margin(std::span<const double> w, const Dataset& data,
                                MarginNorm norm) {
  if (w.size() != data.d())
    throw InvalidInputError("normalized_margin: dimension mismatch");
  double norm_w = 0.0;
  if (norm == MarginNorm::kLinf) {
    for (double x : w) norm_w = std::max(norm_w, std::fabs(x));
  } else {
    for (double x : w) norm_w += x * x;
    norm_w = std::sqrt(norm_w);
  }
  if (norm_w == 0.0)
    throw InvalidInputError("normalized_margin: zero iterate");
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto zi = data.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < data.d(); ++j) dot += w[j] * zi[j];
    min_margin = std::min(min_margin, dot);
  }
  return min_margin / norm_w;
}

/// Maximum l_inf margin by LP:
///   maximize gamma  s.t.  Z w >= gamma 1,  -1 <= w <= 1,
/// with w split into nonnegative parts and box slacks. The dual values of the
/// margin rows form the simplex witness r.
inline MarginCertificate linf_max_margin(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();

  // columns: u(d) v(d) gp gm s(n) p(d) q(d)
  const std::size_t cu = 0, cv = d, cgp = 2 * d, cgm = 2 * d + 1,
                    cs = 2 * d + 2, cp = 2 * d + 2 + n, cq = 3 * d + 2 + n;
  LpProblem lp;
  lp.rows = n + 2 * d;
  lp.cols = 4 * d + n + 2;
  lp.a.assign(lp.rows * lp.cols, 0.0);
  lp.b.assign(lp.rows, 0.0);
  lp.c.assign(lp.cols, 0.0);
  lp.c[cgp] = 1.0;
  lp.c[cgm] = -1.0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      lp.at(i, cu + j) = zi[j];
      lp.at(i, cv + j) = -zi[j];
    }
    lp.at(i, cgp) = -1.0;
    lp.at(i, cgm) = 1.0;
    lp.at(i, cs + i) = -1.0;
    lp.b[i] = 0.0;
  }
  for (std::size_t j = 0; j < d; ++j) {
    lp.at(n + j, cu + j) = 1.0;
    lp.at(n + j, cp + j) = 1.0;
    lp.b[n + j] = 1.0;
    lp.at(n + d + j, cv + j) = 1.0;
    lp.at(n + d + j, cq + j) = 1.0;
    lp.b[n + d + j] = 1.0;
  }

  const LpSolution sol = solve_lp(lp);

  MarginCertificate cert;
  cert.norm = MarginNorm::kLinf;
  cert.gamma = sol.value;
  cert.direction.resize(d);
  for (std::size_t j = 0; j < d; ++j)
    cert.direction[j] = sol.x[cu + j] - sol.x[cv + j];
  cert.separable = cert.gamma > 1e-9;

  // internal min-form duals of the margin rows are the simplex weights
  cert.dual_witness.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    cert.dual_witness[i] = -sol.y[i];

  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = data.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += cert.direction[j] * zi[j];
    min_margin = std::min(min_margin, dot);
  }
  double box_violation = 0.0;
  for (double x : cert.direction)
    box_violation = std::max(box_violation, std::fabs(x) - 1.0);
  cert.residual = std::max({0.0, cert.gamma - min_margin, box_violation});
  return cert;
}

/// The dual side on the simplex:  min_{r in Delta_n} ||Z^T r||_1,
/// as an LP with Z^T r split into positive and negative parts. For separable
/// data strong duality makes the value coincide with the primal gamma; it is
/// solved independently so the pair is a genuine cross-check.
struct SimplexL1Dual {
  double value = 0.0;
  std::vector<double> r;
};

inline SimplexL1Dual simplex_l1_dual(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();

  // columns: r(n) gplus(d) gminus(d); rows: d balance + 1 simplex
  LpProblem lp;
  lp.rows = d + 1;
  lp.cols = n + 2 * d;
  lp.a.assign(lp.rows * lp.cols, 0.0);
  lp.b.assign(lp.rows, 0.0);
  lp.c.assign(lp.cols, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) lp.at(j, i) = data.row(i)[j];
    lp.at(j, n + j) = -1.0;
    lp.at(j, n + d + j) = 1.0;
    lp.c[n + j] = -1.0;      // maximize the negated l1 norm
    lp.c[n + d + j] = -1.0;
  }
  for (std::size_t i = 0; i < n; ++i) lp.at(d, i) = 1.0;
  lp.b[d] = 1.0;

  const LpSolution sol = solve_lp(lp);
  SimplexL1Dual out;
  out.value = -sol.value;
  out.r.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(n));
  return out;
}

/// Maximum l2 margin: min ||u||^2 / 2 s.t. <u, z_i> >= 1, solved through its
/// dual QP by cyclic single-coordinate ascent (SMO-style) to a projected-
/// gradient KKT residual of 1e-8. Separability is decided first via the
/// margin LP; the QP is only run on separable data.
inline MarginCertificate l2_max_margin(const Dataset& data,
                                       std::size_t max_passes = 1000000) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();

  MarginCertificate cert;
  cert.norm = MarginNorm::kL2;
  if (!linf_max_margin(data).separable) {
    cert.separable = false;
    cert.gamma = 0.0;
    cert.direction.assign(d, 0.0);
    return cert;
  }
  cert.separable = true;

  // gram matrix K = Z Z^T
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double dot = 0.0;
      const auto zi = data.row(i);
      const auto zj = data.row(j);
      for (std::size_t l = 0; l < d; ++l) dot += zi[l] * zj[l];
      k[i * n + j] = dot;
      k[j * n + i] = dot;
    }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> k_alpha(n, 0.0);  // K alpha, maintained incrementally
  const double kkt_tol = 1e-8;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (std::size_t pass = 0; pass < max_passes && !converged; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      const double kii = k[i * n + i];
      if (kii <= 0.0) continue;  // zero row, constraint vacuous
      const double delta =
          std::max(-alpha[i], (1.0 - k_alpha[i]) / kii);
      if (delta == 0.0) continue;
      alpha[i] += delta;
      for (std::size_t j = 0; j < n; ++j) k_alpha[j] += delta * k[i * n + j];
    }
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double grad = k_alpha[i] - 1.0;  // d/dalpha_i of -dual objective
      const double projected =
          alpha[i] - std::max(0.0, alpha[i] - grad);  // 0 iff KKT holds at i
      residual = std::max(residual, std::fabs(projected));
    }
    converged = residual <= kkt_tol;
  }
  if (!converged)
    throw NumericalError("l2_max_margin: coordinate ascent did not reach KKT "
                         "tolerance; residual " + std::to_string(residual));

  std::vector<double> u(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    const auto zi = data.row(i);
    for (std::size_t j = 0; j < d; ++j) u[j] += alpha[i] * zi[j];
  }
  double norm_u = 0.0;
  for (double x : u) norm_u += x * x;
  norm_u = std::sqrt(norm_u);
  cert.gamma = 1.0 / norm_u;
  cert.direction.resize(d);
  for (std::size_t j = 0; j < d; ++j) cert.direction[j] = u[j] / norm_u;

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = data.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += u[j] * zi[j];
    worst = std::max(worst, 1.0 - dot);
  }
  cert.residual = worst;
  return cert;
}

}  // namespace marginlab

#endif  // MARGINLAB_MARGINS_HPP
