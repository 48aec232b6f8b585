#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "marginlab/lp.hpp"
#include "marginlab/margins.hpp"
#include "marginlab/rng.hpp"
#include "test_util.hpp"

using namespace marginlab;

namespace {

/// Brute-force LP oracle: enumerate every basis of Ax = b, x >= 0, keep the
/// feasible ones and maximize c^T x over them.
double enumerate_lp_optimum(const LpProblem& p) {
  const std::size_t m = p.rows, n = p.cols;
  std::vector<std::size_t> cols(m);
  double best = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> choice;
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (choice.size() == m) {
      std::vector<double> bmat(m * m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) bmat[i * m + j] = p.at(i, choice[j]);
      std::vector<double> xb;
      try {
        xb = detail::solve_dense(bmat, p.b, m);
      } catch (const NumericalError&) {
        return;  // singular basis
      }
      double value = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (xb[j] < -1e-9) return;  // infeasible vertex
        value += p.c[choice[j]] * xb[j];
      }
      best = std::max(best, value);
      return;
    }
    for (std::size_t j = start; j < n; ++j) {
      choice.push_back(j);
      self(self, j + 1);
      choice.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

/// Max-min margin over a discretized box, the independent l_inf oracle.
double grid_linf_margin_2d(const Dataset& data, int steps_per_axis = 201) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < steps_per_axis; ++a)
    for (int b = 0; b < steps_per_axis; ++b) {
      const double w0 = -1.0 + 2.0 * a / (steps_per_axis - 1);
      const double w1 = -1.0 + 2.0 * b / (steps_per_axis - 1);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < data.n(); ++i)
        worst = std::min(worst, w0 * data.row(i)[0] + w1 * data.row(i)[1]);
      best = std::max(best, worst);
    }
  return best;
}

}  // namespace

TEST_CASE("solve_lp on a one-variable problem") {
  LpProblem p;
  p.rows = 1;
  p.cols = 2;  // x and its slack
  p.a = {1.0, 1.0};
  p.b = {1.0};
  p.c = {1.0, 0.0};
  const LpSolution sol = solve_lp(p);
  CHECK(sol.value == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(sol.x[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(sol.y[0] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_lp agrees with vertex enumeration on random boxes") {
  Xoshiro256 rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    // max c^T x s.t. G x <= h, 0 <= x <= 1; slacks make it standard form
    const std::size_t nv = 2 + rng.next() % 3;
    const std::size_t nc = 1 + rng.next() % 3;
    LpProblem p;
    p.rows = nc + nv;
    p.cols = nv + nc + nv;
    p.a.assign(p.rows * p.cols, 0.0);
    p.b.assign(p.rows, 0.0);
    p.c.assign(p.cols, 0.0);
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nv; ++j) p.at(i, j) = rng.normal();
      p.at(i, nv + i) = 1.0;
      p.b[i] = 1.0 + rng.uniform01();
    }
    for (std::size_t j = 0; j < nv; ++j) {
      p.at(nc + j, j) = 1.0;
      p.at(nc + j, nv + nc + j) = 1.0;
      p.b[nc + j] = 1.0;
      p.c[j] = rng.normal();
    }
    const double expected = enumerate_lp_optimum(p);
    const LpSolution sol = solve_lp(p);
    CHECK(sol.value == Catch::Approx(expected).margin(1e-8));
  }
}

TEST_CASE("solve_lp terminates on duplicated constraints") {
  LpProblem p;
  p.rows = 3;
  p.cols = 4;
  // x1 + x2 <= 1 twice, x1 <= 1; maximize x1 + x2
  p.a = {1.0, 1.0, 1.0, 0.0,
         1.0, 1.0, 0.0, 1.0,
         1.0, 1.0, 0.0, 0.0};
  p.b = {1.0, 1.0, 1.0};
  p.c = {1.0, 1.0, 0.0, 0.0};
  const LpSolution sol = solve_lp(p);
  CHECK(sol.value == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_lp flags infeasible and unbounded problems") {
  LpProblem infeasible;
  infeasible.rows = 2;
  infeasible.cols = 2;
  // x + s = 1 and x - 0*s = 2 cannot both hold with x,s >= 0
  infeasible.a = {1.0, 1.0, 1.0, 0.0};
  infeasible.b = {1.0, 2.0};
  infeasible.c = {1.0, 0.0};
  CHECK_THROWS_AS(solve_lp(infeasible), InfeasibleError);

  LpProblem unbounded;
  unbounded.rows = 1;
  unbounded.cols = 2;
  // x - s = 1 with objective x
  unbounded.a = {1.0, -1.0};
  unbounded.b = {1.0};
  unbounded.c = {1.0, 0.0};
  CHECK_THROWS_AS(solve_lp(unbounded), UnboundedError);
}

TEST_CASE("single-sample l_inf margin is the l1 norm") {
  const Dataset data(1, 2, {2.0, -1.0});
  const MarginCertificate cert = linf_max_margin(data);
  CHECK(cert.separable);
  CHECK(cert.gamma == Catch::Approx(3.0).epsilon(1e-9));
  CHECK(cert.direction[0] == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(cert.direction[1] == Catch::Approx(-1.0).epsilon(1e-9));
  REQUIRE(cert.dual_witness.size() == 1);
  CHECK(cert.dual_witness[0] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("axis-aligned pair against the grid oracle") {
  const Dataset data(2, 2, {1.0, 0.0, 0.0, 1.0});
  const MarginCertificate cert = linf_max_margin(data);
  CHECK(cert.gamma == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(cert.gamma == Catch::Approx(grid_linf_margin_2d(data)).margin(0.02));
  // the optimal direction achieves the certified margin
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 2; ++i)
    worst = std::min(worst, cert.direction[0] * data.row(i)[0] +
                                cert.direction[1] * data.row(i)[1]);
  CHECK(worst >= cert.gamma - 1e-8);
}

TEST_CASE("opposing points are flagged non-separable") {
  const Dataset data(2, 2, {1.0, 0.0, -1.0, 0.0});
  const MarginCertificate cert = linf_max_margin(data);
  CHECK_FALSE(cert.separable);
  CHECK(cert.gamma <= 1e-9);
  CHECK_FALSE(l2_max_margin(data).separable);
}

TEST_CASE("simplex dual on hand cases") {
  const Dataset single(1, 2, {2.0, -1.0});
  const auto one = simplex_l1_dual(single);
  CHECK(one.value == Catch::Approx(3.0).epsilon(1e-9));
  CHECK(one.r[0] == Catch::Approx(1.0).epsilon(1e-9));

  const Dataset pair(2, 2, {1.0, 0.0, 0.0, 1.0});
  const auto two = simplex_l1_dual(pair);
  CHECK(two.value == Catch::Approx(1.0).epsilon(1e-9));
  // independent 1-d grid over r1; here every simplex point is optimal, so
  // only the value and feasibility are pinned, not which vertex comes back
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000; ++k) {
    const double r1 = k / 1000.0;
    best = std::min(best, std::fabs(r1) + std::fabs(1.0 - r1));
  }
  CHECK(two.value == Catch::Approx(best).margin(1e-6));
  CHECK(two.r[0] >= -1e-12);
  CHECK(two.r[1] >= -1e-12);
  CHECK(two.r[0] + two.r[1] == Catch::Approx(1.0).margin(1e-10));
  CHECK(std::fabs(two.r[0]) + std::fabs(two.r[1]) ==
        Catch::Approx(two.value).margin(1e-9));
}

TEST_CASE("strong duality and certificate feasibility on random instances") {
  Xoshiro256 rng(52);
  int separable_seen = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.next() % 8;
    const std::size_t d = 1 + rng.next() % 8;
    const Dataset data = testutil::random_dataset(rng, n, d);
    const MarginCertificate cert = linf_max_margin(data);
    const auto dual = simplex_l1_dual(data);

    CHECK(dual.value >= cert.gamma - 1e-9);  // weak duality always
    if (cert.separable) {
      ++separable_seen;
      CHECK(std::fabs(dual.value - cert.gamma) <= 1e-6);

      double winf = 0.0;
      for (double x : cert.direction) winf = std::max(winf, std::fabs(x));
      CHECK(winf <= 1.0 + 1e-9);
      CHECK(winf >= 1.0 - 1e-9);

      double min_margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j)
          dot += cert.direction[j] * data.row(i)[j];
        min_margin = std::min(min_margin, dot);
      }
      CHECK(min_margin >= cert.gamma - 1e-8);

      double sum_r = 0.0, witness_l1 = 0.0;
      for (double ri : cert.dual_witness) {
        CHECK(ri >= -1e-12);
        sum_r += ri;
      }
      CHECK(sum_r == Catch::Approx(1.0).margin(1e-10));
      for (std::size_t j = 0; j < d; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          col += data.row(i)[j] * cert.dual_witness[i];
        witness_l1 += std::fabs(col);
      }
      CHECK(witness_l1 <= cert.gamma + 1e-6);
    }
  }
  CHECK(separable_seen > 10);  // the sweep exercises the separable branch
}

TEST_CASE("l2 margin on hand cases") {
  const Dataset single(1, 2, {3.0, 4.0});
  const MarginCertificate cert = l2_max_margin(single);
  CHECK(cert.separable);
  CHECK(cert.gamma == Catch::Approx(5.0).epsilon(1e-7));
  CHECK(cert.direction[0] == Catch::Approx(0.6).epsilon(1e-7));
  CHECK(cert.direction[1] == Catch::Approx(0.8).epsilon(1e-7));

  const Dataset pair(2, 2, {1.0, 0.0, 0.0, 1.0});
  const MarginCertificate both = l2_max_margin(pair);
  CHECK(both.gamma == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(both.direction[0] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(both.direction[1] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("l2 margin against the unit-circle sweep") {
  Xoshiro256 rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 1 + rng.next() % 3;
    const Dataset data = testutil::random_dataset(rng, n, 2);
    const MarginCertificate cert = l2_max_margin(data);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
      const double theta = 2.0 * 3.14159265358979323846 * k / 10000.0;
      const double u0 = std::cos(theta), u1 = std::sin(theta);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        worst = std::min(worst, u0 * data.row(i)[0] + u1 * data.row(i)[1]);
      best = std::max(best, worst);
    }
    if (best > 1e-3) {
      REQUIRE(cert.separable);
      CHECK(cert.gamma == Catch::Approx(best).margin(1e-3));
    }
  }
}

TEST_CASE("normalized margin") {
  const Dataset data(2, 2, {1.0, 0.0, 0.0, 1.0});
  const std::vector<double> w = {1.0, 1.0};
  CHECK(normalized_margin(w, data, MarginNorm::kLinf) == Catch::Approx(1.0));
  const std::vector<double> scaled = {2.0, 2.0};
  CHECK(normalized_margin(scaled, data, MarginNorm::kLinf) ==
        Catch::Approx(normalized_margin(w, data, MarginNorm::kLinf)));

  const MarginCertificate cert = linf_max_margin(data);
  CHECK(normalized_margin(cert.direction, data, MarginNorm::kLinf) ==
        Catch::Approx(cert.gamma).margin(1e-8));

  const std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(normalized_margin(zero, data, MarginNorm::kL2),
                  InvalidInputError);
}
