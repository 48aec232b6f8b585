#ifndef MARGINLAB_DIAGNOSTICS_HPP
#define MARGINLAB_DIAGNOSTICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "marginlab/dataset.hpp"
#include "marginlab/errors.hpp"
#include "marginlab/loss.hpp"
#include "marginlab/margins.hpp"
#include "marginlab/optimizer.hpp"
#include "marginlab/schedule.hpp"
#include "marginlab/trajectory.hpp"

namespace marginlab {

/// Online snapshot of the moment-tracking inequalities at one step. The gap
/// ratios are the empirical stand-ins for the bound constants c_m, c_v: the
/// theory asserts they stay bounded, not what the bound is.
struct InvariantReport {
  std::int64_t step = 0;
  double moment_ratio_max = 0.0;                 // max_k |m[k]| / sqrt(v[k])
  std::optional<double> gap_m_ratio;             // vs (1-b1^{t+1}) grad
  std::optional<double> gap_v_ratio;             // vs sqrt(1-b2^{t+1}) |grad|
  double loss = 0.0;
  double g = 0.0;
  double min_margin = 0.0;
  double winf = 0.0;
  double w2 = 0.0;
};

/// Collects the report for the step that produced `stepped`: stepped.m/.v are
/// the moments formed at iterate index t = stepped.t - 1, `iterate` is the
/// pre-step w_t, and `eval` must be the evaluation at w_t (the same one
/// handed to adam_step).
inline InvariantReport collect(std::span<const double> iterate,
                               const OptimizerState& stepped,
                               const LossEval& eval, double eta,
                               const AdamConfig& cfg, const Dataset& data) {
  const OptimizerState& state = stepped;
  const std::size_t d = state.w.size();
  const std::int64_t t = state.t - 1;

  InvariantReport report;
  report.step = t;
  report.loss = eval.value;
  report.g = eval.g_value;

  double ratio_max = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double mv = std::fabs(state.m[k]);
    const double sv = std::sqrt(state.v[k]);
    if (sv > 0.0)
      ratio_max = std::max(ratio_max, mv / sv);
    else if (mv > 0.0)
      ratio_max = std::numeric_limits<double>::infinity();
  }
  report.moment_ratio_max = ratio_max;

  // exponents use the iterate index: m_t vs (1 - beta1^{t+1}) grad(w_t)
  const double b1_pow = std::pow(cfg.beta1, static_cast<double>(t + 1));
  const double b2_pow = std::pow(cfg.beta2, static_cast<double>(t + 1));
  const double denom_m = eta * eval.g_value;
  const double denom_v = std::sqrt(eta) * eval.g_value;
  if (denom_m > 0.0 && std::isfinite(denom_m)) {
    double gap = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      gap = std::max(gap,
                     std::fabs(state.m[k] - (1.0 - b1_pow) * eval.gradient[k]));
    report.gap_m_ratio = gap / denom_m;
  }
  if (denom_v > 0.0 && std::isfinite(denom_v)) {
    const double root = std::sqrt(1.0 - b2_pow);
    double gap = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      gap = std::max(gap, std::fabs(std::sqrt(state.v[k]) -
                                    root * std::fabs(eval.gradient[k])));
    report.gap_v_ratio = gap / denom_v;
  }

  double winf = 0.0, w2 = 0.0;
  for (double x : iterate) {
    winf = std::max(winf, std::fabs(x));
    w2 += x * x;
  }
  report.winf = winf;
  report.w2 = std::sqrt(w2);
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto zi = data.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += iterate[j] * zi[j];
    min_margin = std::min(min_margin, dot);
  }
  report.min_margin = min_margin;
  return report;
}

/// Index of the last upward violation in a loss series, or nullopt if the
/// series is non-increasing throughout. The reported value is the t at which
/// the raised value was observed.
inline std::optional<std::int64_t> monotonicity_check(
    std::span<const std::pair<std::int64_t, double>> series,
    double tol = 1e-12) {
  std::optional<std::int64_t> last;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double prev = series[i - 1].second;
    if (series[i].second > prev + tol * std::max(1.0, std::fabs(prev)))
      last = series[i].first;
  }
  return last;
}

/// Slack of the un-normalized margin lower bound: for each logged step,
///   min_margin(t) - gamma * sum_{tau=t0}^{t-1} eta_tau * G(w_tau)/R(w_tau).
/// The G/R factor between logged points is held at its value from the earlier
/// logged point (it is identically 1 for exponential loss, where the sum is
/// exact). The theory says the slack stays bounded below.
inline std::vector<double> margin_lower_bound_check(
    std::span<const TrajectoryRecord> trajectory, const Schedule& schedule,
    double gamma, std::int64_t t0) {
  std::vector<double> slack;
  double accum = 0.0;
  bool started = false;
  std::int64_t prev_t = t0;
  double prev_ratio = 1.0;
  for (const auto& rec : trajectory) {
    if (rec.t < t0) continue;
    if (rec.loss == 0.0 && rec.g_value == 0.0)
      throw InsufficientLogError(
          "margin_lower_bound_check: row lacks usable G and R");
    if (started) accum += prev_ratio * partial_sum_eta(schedule, prev_t, rec.t);
    slack.push_back(rec.min_margin - gamma * accum);
    // true G/R is scale-free, so the rescaled logged values are fine
    prev_ratio = rec.loss > 0.0 && rec.grad_scale_log == 0.0
                     ? rec.g_value / rec.loss
                     : 1.0;  // deep in the rescaled tail G/R has converged to 1
    prev_t = rec.t;
    started = true;
  }
  if (slack.empty())
    throw InsufficientLogError("margin_lower_bound_check: no rows at t >= t0");
  return slack;
}

/// Excess of ||w_t||_inf over the schedule mass sum_{tau=t0}^{t-1} eta_tau,
/// plus the largest per-gap growth rate relative to the alpha * eta budget.
struct WinfGrowthReport {
  std::vector<double> excess;
  double max_rate = 0.0;  // max over gaps of d||w||_inf / (alpha * sum eta)
};

inline WinfGrowthReport winf_growth_check(
    std::span<const TrajectoryRecord> trajectory, const Schedule& schedule,
    std::int64_t t0, double alpha) {
  WinfGrowthReport report;
  bool started = false;
  std::int64_t prev_t = t0;
  double prev_winf = 0.0;
  double accum = 0.0;
  for (const auto& rec : trajectory) {
    if (rec.t < t0) continue;
    if (started) {
      const double budget = alpha * partial_sum_eta(schedule, prev_t, rec.t);
      accum += partial_sum_eta(schedule, prev_t, rec.t);
      if (budget > 0.0)
        report.max_rate =
            std::max(report.max_rate, (rec.winf - prev_winf) / budget);
    }
    report.excess.push_back(rec.winf - accum);
    prev_t = rec.t;
    prev_winf = rec.winf;
    started = true;
  }
  if (report.excess.empty())
    throw InsufficientLogError("winf_growth_check: no rows at t >= t0");
  return report;
}

/// Ordinary least squares of log(gap) on log(t) over a window of t values.
/// Rows with nonpositive gap or t are excluded; fewer than 5 surviving points
/// is an error.
struct LogLogFit {
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

inline LogLogFit fit_loglog_slope(
    std::span<const std::pair<double, double>> series, double t_lo,
    double t_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, gap] : series)
    if (t >= t_lo && t <= t_hi && t > 0.0 && gap > 0.0)
      pts.emplace_back(std::log(t), std::log(gap));
  if (pts.size() < 5)
    throw NumericalError("fit_loglog_slope: fewer than 5 usable points");

  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / static_cast<double>(pts.size());
  const double my = sy / static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  LogLogFit fit;
  fit.points = pts.size();
  fit.slope = sxy / sxx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace marginlab

#endif  // MARGINLAB_DIAGNOSTICS_HPP
