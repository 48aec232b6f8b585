#ifndef MARGINLAB_SCHEDULE_HPP
#define MARGINLAB_SCHEDULE_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "marginlab/errors.hpp"

namespace marginlab {

/// Learning-rate rule: either a positive constant, or the power decay
/// eta_t = c * (t + 2)^(-a) with a in (0, 1]. Immutable after construction.
class Schedule {
public:
  enum class Rule { kConstant, kPowerDecay };

  static Schedule constant(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta))
      throw InvalidInputError("constant schedule requires eta > 0");
    Schedule s;
    s.rule_ = Rule::kConstant;
    s.eta_ = eta;
    return s;
  }

  static Schedule power_decay(double a, double scale = 1.0) {
    if (!(a > 0.0) || !(a <= 1.0))
      throw InvalidInputError("power decay requires a in (0, 1]");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw InvalidInputError("power decay requires scale > 0");
    Schedule s;
    s.rule_ = Rule::kPowerDecay;
    s.a_ = a;
    s.scale_ = scale;
    return s;
  }

  Rule rule() const { return rule_; }
  double decay_exponent() const { return a_; }
  double scale() const { return scale_; }
  double constant_eta() const { return eta_; }

  std::string describe() const {
    if (rule_ == Rule::kConstant)
      return "constant(eta=" + std::to_string(eta_) + ")";
    return "power_decay(a=" + std::to_string(a_) +
           ", c=" + std::to_string(scale_) + ")";
  }

private:
  Schedule() = default;
  Rule rule_ = Rule::kConstant;
  double eta_ = 1.0;
  double a_ = 0.0;
  double scale_ = 1.0;
};

/// eta_t for step index t >= 0. Total and deterministic.
inline double schedule_eta(const Schedule& s, std::int64_t t) {
  if (s.rule() == Schedule::Rule::kConstant) return s.constant_eta();
  return s.scale() *
         std::pow(static_cast<double>(t) + 2.0, -s.decay_exponent());
}

/// Sum of eta_tau for tau in [t0, t1), by direct summation.
inline double partial_sum_eta(const Schedule& s, std::int64_t t0,
                              std::int64_t t1) {
  if (t0 < 0 || t1 < t0)
    throw InvalidInputError("partial_sum_eta requires 0 <= t0 <= t1");
  if (s.rule() == Schedule::Rule::kConstant)
    return static_cast<double>(t1 - t0) * s.constant_eta();
  double sum = 0.0;
  for (std::int64_t t = t0; t < t1; ++t) sum += schedule_eta(s, t);
  return sum;
}

}  // namespace marginlab

#endif  // MARGINLAB_SCHEDULE_HPP
