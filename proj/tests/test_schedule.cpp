#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "marginlab/rng.hpp"
#include "marginlab/schedule.hpp"

using namespace marginlab;

TEST_CASE("schedule_eta matches the rule") {
  CHECK(schedule_eta(Schedule::power_decay(1.0), 0) == Catch::Approx(0.5));
  CHECK(schedule_eta(Schedule::power_decay(0.5), 2) == Catch::Approx(0.5));
  CHECK(schedule_eta(Schedule::constant(0.01), 1000000) == 0.01);
  CHECK(schedule_eta(Schedule::power_decay(0.5, 3.0), 2) == Catch::Approx(1.5));
}

TEST_CASE("schedule construction validates its domain") {
  CHECK_THROWS_AS(Schedule::constant(0.0), InvalidInputError);
  CHECK_THROWS_AS(Schedule::constant(-1.0), InvalidInputError);
  CHECK_THROWS_AS(Schedule::power_decay(0.0), InvalidInputError);
  CHECK_THROWS_AS(Schedule::power_decay(1.5), InvalidInputError);
  CHECK_THROWS_AS(Schedule::power_decay(0.5, -1.0), InvalidInputError);
}

TEST_CASE("partial_sum_eta sums the exact terms") {
  const Schedule s = Schedule::power_decay(1.0);
  CHECK(partial_sum_eta(s, 0, 2) == Catch::Approx(0.5 + 1.0 / 3.0));
  CHECK(partial_sum_eta(s, 7, 7) == 0.0);

  // independent re-summation
  const Schedule half = Schedule::power_decay(0.5);
  double expected = 0.0;
  for (int t = 0; t < 100; ++t) expected += std::pow(t + 2.0, -0.5);
  CHECK(partial_sum_eta(half, 0, 100) ==
        Catch::Approx(expected).epsilon(1e-14));

  CHECK_THROWS_AS(partial_sum_eta(s, 3, 2), InvalidInputError);
}

TEST_CASE("eta is non-increasing in t") {
  Xoshiro256 rng(11);
  for (const Schedule& s :
       {Schedule::constant(0.3), Schedule::power_decay(0.3),
        Schedule::power_decay(0.5, 2.0), Schedule::power_decay(1.0)}) {
    for (int i = 0; i < 200; ++i) {
      const auto t = static_cast<std::int64_t>(rng.next() % 1000000);
      CHECK(schedule_eta(s, t + 1) <= schedule_eta(s, t));
      CHECK(schedule_eta(s, t) > 0.0);
    }
  }
}

TEST_CASE("partial sums are additive") {
  Xoshiro256 rng(12);
  const Schedule s = Schedule::power_decay(0.7, 1.3);
  for (int i = 0; i < 50; ++i) {
    std::int64_t a = static_cast<std::int64_t>(rng.next() % 500);
    std::int64_t b = a + static_cast<std::int64_t>(rng.next() % 500);
    std::int64_t c = b + static_cast<std::int64_t>(rng.next() % 500);
    const double whole = partial_sum_eta(s, a, c);
    const double split = partial_sum_eta(s, a, b) + partial_sum_eta(s, b, c);
    CHECK(whole == Catch::Approx(split).epsilon(1e-12));
  }
}

TEST_CASE("power-decay partial sums keep growing as the horizon doubles") {
  for (double a : {0.3, 0.5, 1.0}) {
    const Schedule s = Schedule::power_decay(a);
    double previous_increment = 0.0;
    std::int64_t horizon = 1000;
    for (int doubling = 0; doubling < 6; ++doubling) {
      const double increment = partial_sum_eta(s, horizon, 2 * horizon);
      CHECK(increment > 0.0);
      if (a < 1.0 && doubling > 0) CHECK(increment > previous_increment);
      previous_increment = increment;
      horizon *= 2;
    }
  }
}
