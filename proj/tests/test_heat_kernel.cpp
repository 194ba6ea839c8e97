#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "ovals/error.hpp"
#include "ovals/heat_kernel.hpp"
#include "ovals/numerics.hpp"

using namespace ovals;
using std::numbers::pi;

namespace {

double gk(auto f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-12);
}

}  // namespace

TEST_CASE("boundary zeros, symmetry, positivity") {
  for (double t : {1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0}) {
    for (double x : linspace(-1, 1, 21)) {
      CHECK(std::abs(kernel(x, 1, t)) <= 1e-12);
      CHECK(std::abs(kernel(x, -1, t)) <= 1e-12);
      for (double y : linspace(-0.95, 0.95, 9)) {
        CHECK(std::abs(kernel(x, y, t) - kernel(y, x, t)) <= 1e-13);
        if (std::abs(x) < 1 && t >= 0.05) CHECK(kernel(x, y, t) > 0);
        CHECK(kernel(x, y, t) >= -1e-12);
      }
    }
  }
  CHECK_THROWS_AS(kernel(0, 0, 0), Error);
}

TEST_CASE("semigroup and mass") {
  for (double t : {0.05, 0.3, 1.0})
    for (double s : {0.1, 0.7})
      for (double x : {-0.6, 0.0, 0.35})
        for (double y : {-0.2, 0.8}) {
          const double lhs = gk([&](double w) { return kernel(x, w, t) * kernel(w, y, s); }, -1, 1);
          CHECK(std::abs(lhs - kernel(x, y, t + s)) <= 1e-8);
        }
  double prev = 0;
  for (double t : {4.0, 1.0, 0.1, 0.01, 1e-3}) {
    const double m = gk([&](double y) { return kernel(0.0, y, t); }, -1, 1);
    CHECK(m > 0);
    CHECK(m <= 1 + 1e-12);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("boundary flux") {
  for (double t : {0.01, 0.1, 1.0}) {
    CHECK(-boundary_flux(0, t, Boundary::Right) > 0);
    CHECK(boundary_flux(0, t, Boundary::Left) > 0);
    CHECK(-boundary_flux(0, t, Boundary::Right) == doctest::Approx(boundary_flux(0, t, Boundary::Left)).epsilon(1e-13));
  }
  double lo = 1e300, hi = 0;
  for (double t : linspace(0.01, 1, 200)) {
    const double r = -boundary_flux(0, t, Boundary::Right) / (std::pow(t, -1.5) * std::exp(-1 / (4 * t)));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo >= 0.1);
  CHECK(hi <= 10);
  // leading image term: 1/(2 sqrt(pi)) as t -> 0
  const double t = 1e-3;
  CHECK(-boundary_flux(0, t, Boundary::Right) / (std::pow(t, -1.5) * std::exp(-1 / (4 * t))) ==
        doctest::Approx(0.5 / std::sqrt(pi)).epsilon(1e-6));
}

TEST_CASE("lemma A1 scan") {
  auto tab = lemma_A1_scan();
  for (double c : tab.c) {
    CHECK(std::isfinite(c));
    CHECK(c > 0);
    CHECK(c <= 1e3);
  }
  CHECK(tab.C >= 1);
  for (const auto& row : tab.rows) {
    CHECK(std::isfinite(row.ratio));
    if (row.item == 1) CHECK(row.ratio > 0);
  }
  // the item (ii) numerator vanishes at the walls
  CHECK(std::abs(kernel_dxx(0, 0.9999, 1)) < 1e-3);
  CHECK(std::abs(kernel_dxx(0, -0.9999, 1)) < 1e-3);
}

TEST_CASE("representation formula") {
  auto one = [](double) { return 1.0; };
  CaloricData c1{one, one, one};
  auto r1 = representation_solve(c1, 0.0);
  CHECK(r1.h == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(r1.h_xx) < 1e-7);

  // x^2 + 2t + 2
  CaloricData poly{[](double y) { return y * y; }, [](double s) { return 3 + 2 * s; },
                   [](double s) { return 3 + 2 * s; }};
  auto rp = representation_solve(poly, 0.0);
  CHECK(std::abs(rp.h - 2) <= 1e-6);
  CHECK(std::abs(rp.h_xx - 2) <= 1e-6);
  CHECK_FALSE(rp.corner_mismatch);
  auto rx = representation_solve(poly, 0.4);
  CHECK(std::abs(rx.h - (0.16 + 2)) <= 1e-6);

  // separated modes with zero boundary data
  auto zero = [](double) { return 0.0; };
  CaloricData cosm{[](double y) { return std::exp(pi * pi / 4) * std::cos(pi * y / 2); }, zero, zero};
  CHECK(std::abs(representation_solve(cosm, 0.0).h - 1) <= 1e-8);
  CaloricData sinm{[](double y) { return std::sin(pi * y); }, zero, zero};
  for (double x : {-0.5, 0.25, 0.5}) {
    CHECK(std::abs(representation_solve(sinm, x).h - std::exp(-pi * pi) * std::sin(pi * x)) <= 1e-8);
  }
  CaloricData bad{one, zero, zero};
  CHECK(representation_solve(bad, 0.0).corner_mismatch);
}

TEST_CASE("second derivative bound") {
  const double C = lemma_A1_scan(401, 400).C;
  auto one = [](double) { return 1.0; };
  for (double mu : {0.05, 0.1, 0.3, 0.9}) {
    auto b = second_derivative_bound_check({one, one, one}, mu, C);
    CHECK(b.pass);
    CHECK(b.lhs < 1e-7);
  }
  CaloricData poly{[](double y) { return y * y; }, [](double s) { return 3 + 2 * s; },
                   [](double s) { return 3 + 2 * s; }};
  auto bp = second_derivative_bound_check(poly, 0.1, C);
  CHECK(bp.lhs == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(bp.rhs >= C / 0.01 * 2 - 1e-6);
  CHECK(bp.pass);
  CaloricData neg{[](double) { return -1.0; }, [](double) { return -1.0; }, [](double) { return -1.0; }};
  CHECK_THROWS_AS(second_derivative_bound_check(neg, 0.1, C), Error);
}

TEST_CASE("randomized nonnegative caloric samples") {
  const double C = lemma_A1_scan().C;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto d = random_caloric_data(seed);
    CHECK(d.initial(1) == doctest::Approx(d.right(-1)));
    CHECK(d.initial(-1) == doctest::Approx(d.left(-1)));
    CHECK_FALSE(representation_solve(d, 0.0).corner_mismatch);
    for (double mu : {0.05, 0.1, 0.3}) CHECK(second_derivative_bound_check(d, mu, C).pass);
  }
}
