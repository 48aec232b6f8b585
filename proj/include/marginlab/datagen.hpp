#ifndef MARGINLAB_DATAGEN_HPP
#define MARGINLAB_DATAGEN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "marginlab/dataset.hpp"
#include "marginlab/errors.hpp"
#include "marginlab/loss.hpp"
#include "marginlab/margins.hpp"
#include "marginlab/rng.hpp"

namespace marginlab {

/// Gaussian classification instance: x_i ~ N(0, I), y_i Rademacher, stored as
/// z_i = y_i x_i. Draw order per sample: the label first, then the d feature
/// coordinates, all from one Xoshiro256 stream seeded with `seed`.
inline Dataset generate_gaussian(std::size_t n, std::size_t d,
                                 std::int64_t seed) {
  if (n == 0 || d == 0)
    throw InvalidInputError("generate_gaussian: need n, d >= 1");
  Xoshiro256 rng(static_cast<std::uint64_t>(seed));
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rng.rademacher();
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = y * rng.normal();
  }
  return Dataset(n, d, std::move(z), seed);
}

/// Smallest squared gradient entry at w0; the initialization condition asks
/// for this to be bounded away from zero.
struct Assumption2Report {
  double rho_hat = 0.0;
  bool ok = false;
};

inline Assumption2Report check_assumption2(const Dataset& data,
                                           std::span<const double> w0,
                                           LossKind kind) {
  const LossEval eval = evaluate(w0, data, kind, false);
  double rho = std::numeric_limits<double>::infinity();
  for (double g : eval.gradient) rho = std::min(rho, g * g);
  return {rho, rho > 0.0};
}

/// Result of the adversarial dataset search: the separable candidate whose
/// maximum-margin directions for the two norms point farthest apart.
struct AdversarialSelection {
  Dataset dataset;
  double gap_angle = 0.0;          // radians between unit-normalized optima
  std::int64_t chosen_seed = 0;
  std::size_t chosen_index = 0;
  std::vector<nlohmann::json> candidate_reports;

  nlohmann::json report() const {
    nlohmann::json j;
    j["gap_angle"] = gap_angle;
    j["chosen_seed"] = chosen_seed;
    j["chosen_index"] = chosen_index;
    j["candidates"] = candidate_reports;
    return j;
  }
};

/// Angle between the l2-normalized directions, in [0, pi].
inline double direction_angle(std::span<const double> a,
                              std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom == 0.0)
    throw InvalidInputError("direction_angle: zero direction");
  return std::acos(std::clamp(dot / denom, -1.0, 1.0));
}

/// Generates `candidates` datasets from child seeds of `seed` (one splitmix64
/// stream), keeps the separable ones and returns the maximizer of the angle
/// between the l2 and l_inf maximum-margin directions.
inline AdversarialSelection select_adversarial(std::size_t candidates,
                                               std::size_t n, std::size_t d,
                                               std::int64_t seed) {
  if (candidates == 0)
    throw InvalidInputError("select_adversarial: need candidates >= 1");

  std::uint64_t stream = static_cast<std::uint64_t>(seed);
  std::optional<AdversarialSelection> best;
  std::vector<nlohmann::json> reports;
  for (std::size_t idx = 0; idx < candidates; ++idx) {
    const auto child_seed =
        static_cast<std::int64_t>(Xoshiro256::splitmix64(stream));
    Dataset data = generate_gaussian(n, d, child_seed);
    const MarginCertificate linf = linf_max_margin(data);
    nlohmann::json entry;
    entry["index"] = idx;
    entry["seed"] = child_seed;
    entry["separable"] = linf.separable;
    if (!linf.separable) {
      entry["gap_angle"] = nullptr;
      reports.push_back(std::move(entry));
      continue;
    }
    const MarginCertificate l2 = l2_max_margin(data);
    const double angle = direction_angle(linf.direction, l2.direction);
    entry["gap_angle"] = angle;
    entry["gamma_linf"] = linf.gamma;
    entry["gamma_l2"] = l2.gamma;
    reports.push_back(std::move(entry));
    if (!best || angle > best->gap_angle) {
      best.emplace(AdversarialSelection{std::move(data), angle, child_seed,
                                        idx, {}});
    }
  }
  if (!best)
    throw NonSeparableError(
        "select_adversarial: no separable candidate among " +
        std::to_string(candidates));
  best->candidate_reports = std::move(reports);
  return *best;
}

}  // namespace marginlab

#endif  // MARGINLAB_DATAGEN_HPP
