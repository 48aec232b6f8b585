#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "marginlab/datagen.hpp"
#include "marginlab/margins.hpp"

using namespace marginlab;

TEST_CASE("generation is deterministic in the seed") {
  const Dataset a = generate_gaussian(20, 7, 12345);
  const Dataset b = generate_gaussian(20, 7, 12345);
  const Dataset c = generate_gaussian(20, 7, 12346);
  CHECK(a.storage() == b.storage());
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.storage() != c.storage());
  CHECK(a.seed().value() == 12345);
}

TEST_CASE("signed samples have the product-distribution moments") {
  const Dataset data = generate_gaussian(10000, 1, 99);
  double mean = 0.0, second = 0.0;
  for (double z : data.storage()) {
    mean += z;
    second += z * z;
  }
  mean /= 1e4;
  second /= 1e4;
  const double variance = second - mean * mean;
  CHECK(mean > -0.05);
  CHECK(mean < 0.05);
  CHECK(variance > 0.9);
  CHECK(variance < 1.1);
}

TEST_CASE("the experiment-scale regime is separable") {
  const Dataset data = generate_gaussian(50, 50, 7);
  const MarginCertificate cert = linf_max_margin(data);
  CHECK(cert.separable);
  CHECK(cert.gamma > 0.0);
}

TEST_CASE("initialization screening") {
  const Dataset single(1, 3, {2.0, -1.0, 0.5});
  const std::vector<double> zero(3, 0.0);
  const auto rep =
      check_assumption2(single, zero, LossKind::kExponential);
  // gradient at 0 is -z, so rho_hat = min z_k^2
  CHECK(rep.rho_hat == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(rep.ok);

  const Dataset dead_column(2, 2, {1.0, 0.0, -0.5, 0.0});
  const std::vector<double> zero2(2, 0.0);
  const auto bad = check_assumption2(dead_column, zero2, LossKind::kLogistic);
  CHECK_FALSE(bad.ok);
  CHECK(bad.rho_hat == 0.0);

  Xoshiro256 rng(71);
  const Dataset gauss = generate_gaussian(50, 50, 3);
  std::vector<double> w0(50);
  for (auto& x : w0) x = rng.normal();
  CHECK(check_assumption2(gauss, w0, LossKind::kLogistic).ok);
}

TEST_CASE("coinciding optimal directions give zero angle") {
  const Dataset point(1, 2, {1.0, 1.0});
  const MarginCertificate linf = linf_max_margin(point);
  const MarginCertificate l2 = l2_max_margin(point);
  CHECK(direction_angle(linf.direction, l2.direction) ==
        Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("a single candidate is returned as-is") {
  const auto sel = select_adversarial(1, 10, 10, 5);
  CHECK(sel.chosen_index == 0);
  CHECK(sel.gap_angle >= 0.0);
  CHECK(sel.dataset.n() == 10);
}

TEST_CASE("the selected candidate maximizes the direction angle") {
  const auto sel = select_adversarial(10, 50, 50, 2024);
  REQUIRE(sel.candidate_reports.size() == 10);
  // recompute every candidate's angle from its recorded seed
  for (const auto& entry : sel.candidate_reports) {
    if (!entry.at("separable").get<bool>()) continue;
    const auto seed = entry.at("seed").get<std::int64_t>();
    const Dataset data = generate_gaussian(50, 50, seed);
    const double angle = direction_angle(linf_max_margin(data).direction,
                                         l2_max_margin(data).direction);
    CHECK(angle == Catch::Approx(entry.at("gap_angle").get<double>())
                       .margin(1e-9));
    CHECK(angle <= sel.gap_angle + 1e-12);
  }
  const MarginCertificate chosen_linf = linf_max_margin(sel.dataset);
  CHECK(chosen_linf.separable);
  CHECK(chosen_linf.gamma > 0.0);
  CHECK(l2_max_margin(sel.dataset).gamma > 0.0);
}
