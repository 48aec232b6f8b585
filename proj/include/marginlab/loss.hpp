#ifndef MARGINLAB_LOSS_HPP
#define MARGINLAB_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "marginlab/dataset.hpp"
#include "marginlab/errors.hpp"

namespace marginlab {

// --- scalar loss primitives -------------------------------------------------

/// log(1 + e^x) without overflow for large |x|.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double loss_value(LossKind kind, double z) {
  if (kind == LossKind::kExponential) return std::exp(-z);
  return softplus(-z);
}

/// l'(z); negative for both families.
inline double loss_deriv(LossKind kind, double z) {
  if (kind == LossKind::kExponential) return -std::exp(-z);
  // -1/(1+e^z), evaluated through e^{-|z|} so e^z never overflows
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

inline double loss_second_deriv(LossKind kind, double z) {
  if (kind == LossKind::kExponential) return std::exp(-z);
  const double e = std::exp(-std::fabs(z));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

/// log(-l'(z)), exact in the exponent even where -l'(z) underflows double.
inline double log_neg_deriv(LossKind kind, double z) {
  if (kind == LossKind::kExponential) return -z;
  return -softplus(z);
}

// --- empirical loss over a dataset -------------------------------------------

/// Evaluation of R(w) and its companions at one iterate.
///
/// scale_log is the natural-log factor relating the stored (rescaled)
/// quantities to the true ones: true = exp(scale_log) * stored. It applies to
/// gradient, g_value and per_sample_neg_deriv but never to value, which may
/// underflow to 0 and is reported as-is.
struct LossEval {
  double value = 0.0;
  std::vector<double> gradient;
  double g_value = 0.0;
  std::vector<double> per_sample_neg_deriv;
  double scale_log = 0.0;
};

/// Rescaling engages once max_i(-l'(<w, z_i>)) falls below this threshold.
/// It must be large enough that squared gradient entries (the second-moment
/// inputs) stay in the normal double range: at 1e-120 the squares sit near
/// 1e-240, two hundred orders of magnitude above the subnormal boundary.
inline constexpr double kRescaleTriggerLog = -276.0;  // ~ log(1e-120)

/// <w, z_i> for every sample.
inline std::vector<double> per_sample_margins(std::span<const double> w,
                                              const Dataset& data) {
  if (w.size() != data.d())
    throw InvalidInputError("per_sample_margins: w has wrong dimension");
  std::vector<double> margins(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto zi = data.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < data.d(); ++j) dot += w[j] * zi[j];
    margins[i] = dot;
  }
  return margins;
}

/// R(w), its gradient, G(w) and the per-sample -l'/n vector.
///
/// With `rescale` set, all of gradient/g_value/per_sample_neg_deriv switch to
/// rescaled units once the raw derivatives drop below the trigger; the Adam
/// direction m/sqrt(v) is invariant under that common positive factor.
inline LossEval evaluate(std::span<const double> w, const Dataset& data,
                         LossKind kind, bool rescale = false) {
  for (double v : w)
    if (!std::isfinite(v))
      throw InvalidInputError("evaluate: non-finite iterate");
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double log_n = std::log(static_cast<double>(n));

  const std::vector<double> margins = per_sample_margins(w, data);

  // log(-l'(s_i)/n) per sample; exact in log space.
  std::vector<double> log_p(n);
  double max_log_neg_deriv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double lnd = log_neg_deriv(kind, margins[i]);
    max_log_neg_deriv = std::max(max_log_neg_deriv, lnd);
    log_p[i] = lnd - log_n;
  }

  LossEval out;
  out.scale_log = 0.0;
  if (rescale && max_log_neg_deriv < kRescaleTriggerLog) {
    // rescaled per-sample vector gets max entry exactly 1
    out.scale_log = max_log_neg_deriv - log_n;
  }

  out.per_sample_neg_deriv.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.per_sample_neg_deriv[i] = std::exp(log_p[i] - out.scale_log);

  out.gradient.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = out.per_sample_neg_deriv[i];
    const auto zi = data.row(i);
    for (std::size_t j = 0; j < d; ++j) out.gradient[j] -= p * zi[j];
  }

  double g = 0.0;
  for (double p : out.per_sample_neg_deriv) g += p;
  out.g_value = g;

  if (kind == LossKind::kExponential) {
    // summed through the same exp(log_p) terms as g_value, so that at
    // scale_log == 0 the two are bitwise identical (G == R for exp loss)
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += std::exp(log_p[i]);
    out.value = value;
  } else {
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += softplus(-margins[i]);
    out.value = value / static_cast<double>(n);
  }
  return out;
}

// --- lemma-shaped property reports -------------------------------------------

/// Evaluated sides of the pointwise loss inequalities. `holds` summarizes all
/// applicable comparisons at (z1, z2).
struct LossPropertyReport {
  // l''(z1) <= |l'(z1)| <= l(z1)
  double second_deriv = 0.0;
  double abs_deriv = 0.0;
  double value = 0.0;
  // z1 >= 0, logistic only: l(z1) <= 2|l'(z1)| and l_log(z1)/l_exp(z1) >= log 2
  bool nonneg_branch_checked = false;
  double twice_abs_deriv = 0.0;
  double log_exp_ratio = 0.0;
  // |l'(z1)/l'(z2) - 1| <= e^{|z1-z2|} - 1
  double deriv_ratio_gap = 0.0;
  double deriv_ratio_bound = 0.0;
  bool holds = false;
};

inline LossPropertyReport loss_property_check(double z1, double z2,
                                              LossKind kind) {
  if (!std::isfinite(z1) || !std::isfinite(z2))
    throw InvalidInputError("loss_property_check: non-finite argument");
  LossPropertyReport r;
  r.second_deriv = loss_second_deriv(kind, z1);
  r.abs_deriv = std::fabs(loss_deriv(kind, z1));
  r.value = loss_value(kind, z1);

  // |a/b - 1| computed in log space so ratios of underflowing derivatives
  // stay meaningful
  const double log_ratio =
      log_neg_deriv(kind, z1) - log_neg_deriv(kind, z2);
  r.deriv_ratio_gap = std::fabs(std::expm1(log_ratio));
  r.deriv_ratio_bound = std::expm1(std::fabs(z1 - z2));

  bool ok = r.second_deriv <= r.abs_deriv * (1.0 + 1e-12) &&
            r.abs_deriv <= r.value * (1.0 + 1e-12) &&
            r.deriv_ratio_gap <= r.deriv_ratio_bound * (1.0 + 1e-12) + 1e-300;

  if (z1 >= 0.0 && kind == LossKind::kLogistic) {
    r.nonneg_branch_checked = true;
    r.twice_abs_deriv = 2.0 * r.abs_deriv;
    const double log_over_exp = softplus(-z1) / std::exp(-z1);
    r.log_exp_ratio = log_over_exp;
    ok = ok && r.value <= r.twice_abs_deriv * (1.0 + 1e-12) &&
         log_over_exp >= std::log(2.0) * (1.0 - 1e-12);
  }
  r.holds = ok;
  return r;
}

/// G(w)/R(w) against the lower bound 1 - n R(w)/2 (logistic loss).
struct RatioLogReport {
  double g_over_r = 0.0;
  double bound = 0.0;
  bool holds = false;
};

inline RatioLogReport ratio_log_check(std::span<const double> w,
                                      const Dataset& data) {
  const LossEval eval = evaluate(w, data, LossKind::kLogistic, false);
  if (eval.value == 0.0)
    throw NumericalError("ratio_log_check: R(w) underflowed to zero");
  RatioLogReport r;
  r.g_over_r = eval.g_value / eval.value;
  r.bound = 1.0 - static_cast<double>(data.n()) * eval.value / 2.0;
  r.holds = r.g_over_r >= r.bound - 1e-12;
  return r;
}

}  // namespace marginlab

#endif  // MARGINLAB_LOSS_HPP
