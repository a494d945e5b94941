#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "periodbounds/constants.hpp"

using namespace periodbounds;
using doctest::Approx;

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
}

TEST_CASE("PExponent validates and conjugates") {
  PExponent<double> p(3.0);
  CHECK(p.conjugate() == Approx(1.5).epsilon(1e-15));
  CHECK(p.inverse_conjugate() == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p.conjugate_exponent().value() == Approx(1.5));
  CHECK_THROWS_AS(PExponent<double>(1.0), DomainError);
  CHECK_THROWS_AS(PExponent<double>(0.5), DomainError);
  CHECK_THROWS_AS(PExponent<double>(std::nan("")), DomainError);
  CHECK_THROWS_AS(PExponent<double>(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("compute_cp reference values") {
  // Independent high-precision values.
  struct Row {
    double p, inverse;
  };
  const Row rows[] = {{2.0, kTwoPi},
                      {3.0, 6.093983998092345},
                      {1.5, 6.093983998092345},
                      {4.0, 5.847162777500241},
                      {1.43, 6.010475278497183},
                      {3.35, 6.004277668797923},
                      {1.01, 4.187280018907655},
                      {50.0, 4.326629477865599}};
  for (const auto &r : rows) {
    CAPTURE(r.p);
    const auto c = compute_cp(r.p);
    CHECK(std::abs(c.c_p_inverse - r.inverse) <= 1e-12 * r.inverse);
    CHECK(c.c_p * c.c_p_inverse == Approx(1.0).epsilon(1e-15));
    CHECK(c.method == ConstantMethod::closed_form);
  }
  CHECK(std::abs(compute_cp(2.0).c_p - 1 / kTwoPi) <= 1e-15);
}

TEST_CASE("compute_cp near the endpoints") {
  CHECK(std::abs(cp_inverse(1.0 + 1e-6) - 4.0000553) < 1e-6);
  CHECK(std::abs(cp_inverse(1e6) - 4.0000553) < 1e-6);
  CHECK_THROWS_AS(compute_cp(1.0 + 1e-10), DomainError);
}

TEST_CASE("quadrature agrees with the closed form") {
  for (double p : {1.01, 1.1, 1.5, 2.0, 3.0, 7.0, 50.0}) {
    CAPTURE(p);
    const auto q = cp_quadrature(PExponent<double>(p), 1e-10);
    CHECK(q.method == ConstantMethod::quadrature);
    CHECK(std::abs(q.c_p - compute_cp(p).c_p) <= 1e-10);
  }
  CHECK_THROWS_AS(cp_quadrature(PExponent<double>(2.0), 1e-3), DomainError);
  CHECK_THROWS_AS(cp_quadrature(PExponent<double>(2.0), 0.0), DomainError);
}

TEST_CASE("beta integral at p = 2 is pi") {
  const auto r = beta_integral(PExponent<double>(2.0), 1e-13);
  CHECK(r.value == Approx(std::numbers::pi).epsilon(1e-13));
  CHECK(r.error_estimate >= 0);
}

TEST_CASE("integrate_adaptive") {
  const auto r = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-14);
  CHECK(r.value == Approx(std::exp(1.0) - 1).epsilon(1e-14));
  const auto s = integrate_adaptive([](double x) { return 1 / std::sqrt(x); }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(s.value - 2) < 1e-8);
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sin(1 / x) / x; }, 1e-12, 1.0, 1e-15, 10),
                  ConvergenceError);
}

TEST_CASE("supercritical range at threshold 6") {
  const auto r = supercritical_range(6.0);
  CHECK(std::abs(r.p_low - 1.422495352661166) < 1e-9);
  CHECK(std::abs(r.p_high - 3.366889940211919) < 1e-9);
  CHECK(r.p_low * r.p_high == Approx(r.p_low + r.p_high).epsilon(1e-9));
  CHECK(cp_inverse(r.p_low) == Approx(6.0).epsilon(1e-9));
  CHECK(cp_inverse(r.p_high) == Approx(6.0).epsilon(1e-9));
}

TEST_CASE("supercritical range edge cases") {
  CHECK_THROWS_AS(supercritical_range(kTwoPi), DomainError);
  CHECK_THROWS_AS(supercritical_range(7.0), DomainError);
  CHECK_THROWS_AS(supercritical_range(4.0), DomainError);
  const auto near = supercritical_range(kTwoPi - 1e-6);
  CHECK(near.p_low < 2.0);
  CHECK(near.p_high > 2.0);
  CHECK(near.p_high - near.p_low < 0.05);
  const auto wide = supercritical_range(4.2);
  CHECK(wide.p_low < 1.1);
  CHECK(wide.p_high > 10.0);
}

TEST_CASE("conjugate symmetry on random exponents") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_p(std::log(1.001), std::log(1000.0));
  for (int i = 0; i < 100; ++i) {
    const double p = std::exp(log_p(rng));
    CAPTURE(p);
    CHECK(conjugate_symmetry_check(PExponent<double>(p)).abs_diff <= 1e-12);
  }
}

TEST_CASE("C_p^{-1} is unimodal with its maximum at p = 2") {
  const auto rows = figure_data(1.01, 20.0, 0.01);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].p <= 2.0 + 1e-12) CHECK(rows[i].c_p_inverse > rows[i - 1].c_p_inverse);
    else CHECK(rows[i].c_p_inverse < rows[i - 1].c_p_inverse);
  }
  CHECK(cp_inverse(2.0) >= cp_inverse(2.0 + 1e-6));
  CHECK(cp_inverse(2.0) >= cp_inverse(2.0 - 1e-6));
}

TEST_CASE("figure_data grid") {
  const auto rows = figure_data(1.05, 4.0, 0.01);
  REQUIRE(rows.size() == 296);
  CHECK(rows.front().p == Approx(1.05));
  CHECK(rows.back().p == Approx(4.0));
  CHECK(rows[95].p == Approx(2.0));
  CHECK(rows[95].c_p_inverse == Approx(kTwoPi).epsilon(1e-12));
  CHECK_THROWS_AS(figure_data(1.0, 4.0, 0.01), DomainError);
  CHECK_THROWS_AS(figure_data(2.0, 1.5, 0.01), DomainError);
  CHECK_THROWS_AS(figure_data(1.5, 2.0, 0.0), DomainError);
}

TEST_CASE("remark2_bound") {
  CHECK(remark2_bound(0.0) == kTwoPi);
  CHECK(std::abs(remark2_bound(0.1) - 4.673443616910436) < 1e-12);
  CHECK(std::abs(remark2_bound(0.5) - 1.396263401595464) < 1e-12);
  for (int i = 1; i <= 90; ++i) CHECK(remark2_bound(0.01 * i) < remark2_bound(0.01 * (i - 1)));
  CHECK_THROWS_AS(remark2_bound(1.0), DomainError);
  CHECK_THROWS_AS(remark2_bound(-0.1), DomainError);
}
