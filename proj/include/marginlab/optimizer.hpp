#ifndef MARGINLAB_OPTIMIZER_HPP
#define MARGINLAB_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "marginlab/errors.hpp"
#include "marginlab/loss.hpp"
#include "marginlab/schedule.hpp"

namespace marginlab {

/// Adam hyperparameters. The recursion is the uncorrected one (no division by
/// 1 - beta^t); epsilon = 0 is the analyzed setting, 1e-8 the practical one.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 0.0;
  /// sqrt(beta2 (1-beta1)^2 / ((1-beta2)(beta2 - beta1^2))); the universal
  /// bound on |m[k]| / sqrt(v[k]) when beta1 <= beta2.
  double alpha = 0.0;

  AdamConfig(double b1, double b2, double eps = 0.0)
      : beta1(b1), beta2(b2), epsilon(eps) {
    if (!(b1 >= 0.0 && b1 < 1.0) || !(b2 >= 0.0 && b2 < 1.0))
      throw InvalidInputError("adam betas must lie in [0, 1)");
    if (!(eps >= 0.0))
      throw InvalidInputError("adam epsilon must be nonnegative");
    if (b1 > b2)
      throw InvalidInputError("adam requires beta1 <= beta2");
    alpha = moment_ratio_bound(b1, b2);
  }

  /// Bypasses the beta1 <= beta2 check; exists so tests can probe the
  /// invariant's failure mode.
  static AdamConfig unchecked(double b1, double b2, double eps = 0.0) {
    AdamConfig cfg(0.0, 0.0, eps);
    cfg.beta1 = b1;
    cfg.beta2 = b2;
    cfg.alpha = moment_ratio_bound(b1, b2);
    return cfg;
  }

  static double moment_ratio_bound(double b1, double b2) {
    if (b2 == 0.0) return 1.0;  // limit of the formula as beta2 -> 0
    const double denom = (1.0 - b2) * (b2 - b1 * b1);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(b2 * (1.0 - b1) * (1.0 - b1) / denom);
  }
};

/// Momentum-free or heavy-ball baseline.
struct BaselineConfig {
  enum class Method { kGd, kGdm };
  Method method = Method::kGd;
  double momentum = 0.0;

  static BaselineConfig gd() { return {}; }
  static BaselineConfig gdm(double mu) {
    if (!(mu >= 0.0 && mu < 1.0))
      throw InvalidInputError("gdm momentum must lie in [0, 1)");
    BaselineConfig cfg;
    cfg.method = Method::kGdm;
    cfg.momentum = mu;
    return cfg;
  }
};

/// Value-type optimizer state; steps are pure transitions, so independent
/// runs can proceed in parallel without shared mutable state.
///
/// m and v are stored in the units of the gradient that built them; the
/// current unit is tracked by grad_scale_log (true = exp(grad_scale_log) *
/// stored, matching LossEval::scale_log).
struct OptimizerState {
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double grad_scale_log = 0.0;

  explicit OptimizerState(std::vector<double> w0)
      : w(std::move(w0)), m(w.size(), 0.0), v(w.size(), 0.0) {}
};

namespace detail {
/// Re-express m, v in the units of `target_scale_log`. m scales linearly with
/// the gradient and v quadratically, so the update m/sqrt(v) is unchanged in
/// exact arithmetic.
inline void rebase_moments(OptimizerState& state, double target_scale_log) {
  if (state.grad_scale_log == target_scale_log) return;
  const double c = std::exp(state.grad_scale_log - target_scale_log);
  const double c2 = c * c;
  for (auto& mi : state.m) mi *= c;
  for (auto& vi : state.v) vi *= c2;
  state.grad_scale_log = target_scale_log;
}
}  // namespace detail

/// One Adam step (uncorrected recursion):
///   m' = b1 m + (1-b1) g,  v' = b2 v + (1-b2) g^2,
///   w' = w - eta m' / (sqrt(v') + eps).
/// `eval` must have been computed at state.w. epsilon is interpreted in true
/// gradient units, so under rescaling it enters as epsilon*exp(-scale_log).
inline OptimizerState adam_step(OptimizerState state, const LossEval& eval,
                                double eta, const AdamConfig& cfg) {
  if (!(eta > 0.0)) throw InvalidInputError("adam_step: eta must be positive");
  if (eval.gradient.size() != state.w.size())
    throw InvalidInputError("adam_step: gradient dimension mismatch");
  detail::rebase_moments(state, eval.scale_log);

  const double eps_scaled =
      cfg.epsilon == 0.0 ? 0.0 : cfg.epsilon * std::exp(-state.grad_scale_log);
  const std::size_t d = state.w.size();
  for (std::size_t k = 0; k < d; ++k) {
    const double g = eval.gradient[k];
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
    const double denom = std::sqrt(state.v[k]) + eps_scaled;
    if (denom == 0.0)
      throw DegenerateCoordinateError(k, static_cast<std::size_t>(state.t));
    state.w[k] -= eta * state.m[k] / denom;
  }
  state.t += 1;
  return state;
}

/// One GD or heavy-ball step. Baselines run on true-unit gradients only;
/// their trajectories are not invariant under gradient rescaling.
inline OptimizerState baseline_step(OptimizerState state, const LossEval& eval,
                                    double eta, const BaselineConfig& cfg) {
  if (!(eta > 0.0))
    throw InvalidInputError("baseline_step: eta must be positive");
  if (eval.gradient.size() != state.w.size())
    throw InvalidInputError("baseline_step: gradient dimension mismatch");
  if (eval.scale_log != 0.0)
    throw InvalidInputError("baseline_step: rescaled gradients not supported");

  const double mu =
      cfg.method == BaselineConfig::Method::kGdm ? cfg.momentum : 0.0;
  const std::size_t d = state.w.size();
  for (std::size_t k = 0; k < d; ++k) {
    state.m[k] = mu * state.m[k] + eval.gradient[k];
    state.w[k] -= eta * state.m[k];
  }
  state.t += 1;
  return state;
}

/// Empirical probe of the geometric-sum schedule condition: for each t,
///   ratio(t) = sum_{tau=0}^{t} beta^tau (exp(c1 sum_{tau'=1}^{tau}
///              eta_{t-tau'}) - 1) / eta_t,
/// by direct summation. The condition asks for a constant bound on the tail.
struct Assumption4Report {
  std::vector<double> ratios;  // index t in [0, horizon]
  double tail_sup = 0.0;       // over t in [horizon/2, horizon]
};

inline Assumption4Report check_assumption4(const Schedule& s, double beta,
                                           double c1, std::int64_t horizon) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidInputError("check_assumption4: beta must lie in (0, 1)");
  if (!(c1 > 0.0) || horizon < 1)
    throw InvalidInputError("check_assumption4: need c1 > 0 and horizon >= 1");

  // all eta values once; the inner sums walk backwards through them
  std::vector<double> eta(static_cast<std::size_t>(horizon) + 1);
  for (std::int64_t t = 0; t <= horizon; ++t)
    eta[static_cast<std::size_t>(t)] = schedule_eta(s, t);

  Assumption4Report report;
  report.ratios.resize(static_cast<std::size_t>(horizon) + 1);
  for (std::int64_t t = 0; t <= horizon; ++t) {
    double acc = 0.0;
    double beta_pow = 1.0;
    double inner = 0.0;  // sum_{tau'=1}^{tau} eta_{t - tau'}
    for (std::int64_t tau = 0; tau <= t; ++tau) {
      if (tau >= 1) inner += eta[static_cast<std::size_t>(t - tau)];
      acc += beta_pow * std::expm1(c1 * inner);
      beta_pow *= beta;
      if (std::isinf(acc)) break;  // reported as an infinite ratio
    }
    report.ratios[static_cast<std::size_t>(t)] =
        acc / eta[static_cast<std::size_t>(t)];
  }
  double sup = 0.0;
  for (std::int64_t t = horizon / 2; t <= horizon; ++t)
    sup = std::max(sup, report.ratios[static_cast<std::size_t>(t)]);
  report.tail_sup = sup;
  return report;
}

}  // namespace marginlab

#endif  // MARGINLAB_OPTIMIZER_HPP
