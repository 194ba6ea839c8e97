#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ovals/bryant.hpp"
#include "ovals/error.hpp"
#include "ovals/profile.hpp"

using namespace ovals;

namespace {
const BryantSolution& normalized() {
  static const BryantSolution sol = solve_phi(-1.0 / 6.0);
  return sol;
}
}  // namespace

TEST_CASE("series coefficients") {
  const double b0 = -1.0 / 6.0;
  auto p = phi_series(b0, 4);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == b0);
  // hand expansion of the x^1 balance: 10 p2 - 4 p1^2 = 0
  CHECK(p[2] == doctest::Approx(0.4 * b0 * b0).epsilon(1e-14));
  // truncated series satisfies the ODE to the truncation order
  for (double r : {1e-2, 5e-3}) {
    double phi = 0, d1 = 0, d2 = 0;
    for (int k = 0; k <= 4; ++k) {
      phi += p[k] * std::pow(r, 2 * k);
      if (k >= 1) d1 += 2 * k * p[k] * std::pow(r, 2 * k - 1);
      if (k >= 1) d2 += 2 * k * (2 * k - 1) * p[k] * std::pow(r, 2 * k - 2);
    }
    const double res = phi * d2 - 0.5 * d1 * d1 + (1 - phi) * (r * d1 + 2 * phi) / (r * r);
    CHECK(std::abs(res) < 1e-9 * std::pow(r / 1e-2, 8));
  }
}

TEST_CASE("normalized soliton constants") {
  const auto& s = normalized();
  CHECK(std::abs(s.tip_scalar_curvature() - 1.0) <= 1e-6);
  CHECK(std::abs(s.c0 - 1.0) <= 0.02);
  CHECK(std::abs(s.tail_d / (2 * s.tail_c0_two_param * s.tail_c0_two_param) - 1.0) <= 0.10);
  CHECK(std::abs(ray_ricci_integral(s) - 1.0) <= 0.01);
  CHECK(phi_ode_residual(s) <= 1e-8);
}

TEST_CASE("invariants of the stored solution") {
  const auto& s = normalized();
  const std::size_t n = s.r_grid.size();
  CHECK(n == 2000);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(s.phi_values[i] > 0);
    CHECK(s.phi_values[i] <= 1);
    CHECK(s.k_orb(i) > 0);
    CHECK(s.k_rad(i) > 0);
    if (i > 0) {
      CHECK(s.phi_values[i] < s.phi_values[i - 1]);
      CHECK(s.scalar_curvature(i) < s.scalar_curvature(i - 1));
    }
  }
  const std::size_t e = n - 1;
  const double r = s.r_grid[e], z = s.z_of_r[e];
  CHECK(r * r * s.k_orb(e) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(2 * z * s.k_orb(e) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(4 * z * z * s.k_rad(e) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("scale invariance and truncation") {
  const auto& s = normalized();
  const double lam = 2.0;
  auto t = solve_phi(-lam * lam / 6.0, 500.0);
  // Phi_lam(r) = Phi(lam r): compare at stored radii of t with lam r in range
  for (std::size_t i = 100; i < t.r_grid.size(); i += 97) {
    const double target = lam * t.r_grid[i];
    const std::size_t j = static_cast<std::size_t>(std::lower_bound(s.r_grid.begin(), s.r_grid.end(), target) - s.r_grid.begin());
    if (j == 0 || j >= s.r_grid.size()) continue;
    // log-linear interpolation on the fine grid
    const double u = (std::log(target) - std::log(s.r_grid[j - 1])) / (std::log(s.r_grid[j]) - std::log(s.r_grid[j - 1]));
    const double phi = std::exp((1 - u) * std::log(s.phi_values[j - 1]) + u * std::log(s.phi_values[j]));
    CHECK(t.phi_values[i] == doctest::Approx(phi).epsilon(1e-4));
  }
  auto longer = solve_phi(-1.0 / 6.0, 2e3);
  CHECK(std::abs(ray_ricci_integral(longer) / ray_ricci_integral(s) - 1) < 1e-3);
  // unnormalized input is rejected
  CHECK_THROWS_AS(ray_ricci_integral(t), Error);
}

TEST_CASE("cap profiles") {
  const auto& s = normalized();
  auto cap = bryant_cap_profile(s, 1.0, 4001, 40.0);
  CHECK(tip_scalar_curvature(cap, Side::Left) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(cap.check_invariants().ok());
  // large-s asymptote sqrt(2 s)
  const double zf = 0.9 * s.z_of_r.back();
  CHECK(s.B(zf) / std::sqrt(2 * zf) == doctest::Approx(1.0).epsilon(0.02));
  // R_tip and 4 R_tip caps: (z, F) -> (z/2, F/2)
  auto c1 = bryant_cap_profile(s, 1.0, 201, 10.0);
  auto c4 = bryant_cap_profile(s, 4.0, 201, 5.0);
  for (std::size_t i = 0; i < 201; ++i) {
    CHECK(c4.z()[i] == doctest::Approx(c1.z()[i] / 2));
    CHECK(c4.f()[i] == doctest::Approx(c1.f()[i] / 2).epsilon(1e-12));
  }
  auto c9 = bryant_cap_profile(s, 9.0, 4001, 40.0 / 3.0);
  CHECK(tip_scalar_curvature(c9, Side::Left) == doctest::Approx(9.0).epsilon(0.01));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(solve_phi(0.1), Error);
  CHECK_THROWS_AS(bryant_cap_profile(normalized(), -1.0, 10, 1.0), Error);
}
