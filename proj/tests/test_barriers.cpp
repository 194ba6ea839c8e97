#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ovals/ansatz.hpp"
#include "ovals/barriers.hpp"
#include "ovals/error.hpp"
#include "ovals/flow.hpp"

using namespace ovals;

namespace {
const BarrierFunction& barrier(double a) {
  static const BarrierFunction b10 = build_barrier(10), b20 = build_barrier(20), b40 = build_barrier(40);
  return a == 10 ? b10 : a == 20 ? b20 : b40;
}
}  // namespace

TEST_CASE("operator on closed forms") {
  // outer candidate a^-2 (s^-2 - 1) at s = 1: a^4 N = 4 - 4 - 2
  for (double a : {10.0, 40.0}) {
    const double A = 1 / (a * a);
    const double N = barrier_operator(1.0, 0.0, -2 * A, 6 * A);
    CHECK(N / (A * A) == doctest::Approx(-2).epsilon(1e-12));
  }
  // constant 1/2: N = s^-2 (1/2)(1)
  for (double s : {0.2, 0.7, 1.0}) CHECK(barrier_operator(s, 0.5, 0, 0) == doctest::Approx(0.5 / (s * s)));
  std::vector<double> s, psi;
  for (int i = 0; i <= 200; ++i) {
    s.push_back(0.1 + 0.9 * i / 200.0);
    psi.push_back(0.5);
  }
  CHECK(verify_supersolution(s, psi) > 0);
}

TEST_CASE("Bryant inner piece is not a supersolution") {
  // Phi solves the soliton ODE, so N[Phi(a s)] reduces to -a s Phi'(a s) > 0
  const auto sol = solve_phi(-1.0 / 6);
  const double a = 20;
  std::vector<double> s, psi;
  for (std::size_t i = 0; i < sol.r_grid.size(); ++i) {
    if (sol.r_grid[i] < 0.5 || sol.r_grid[i] > 5) continue;
    s.push_back(sol.r_grid[i] / a);
    psi.push_back(sol.phi_values[i]);
  }
  const auto N = barrier_residual(s, psi);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double x = s[i] * a;
    const double dphi = (psi[i + 1] - psi[i - 1]) / (a * (s[i + 1] - s[i - 1]));
    CHECK(N[i] > 0);
    CHECK(N[i] == doctest::Approx(-x * dphi).epsilon(2e-2));
  }
}

TEST_CASE("constructed family") {
  double prev_plateau = INFINITY;
  for (double a : {10.0, 20.0, 40.0}) {
    const auto& b = barrier(a);
    const auto pr = verify_properties(b);
    CHECK(pr.ok());
    CHECK(pr.max_N < 0);
    CHECK(b(b.s_min()) >= 1.5);
    CHECK(pr.min_psi_a4 >= 1.0 / 32);
    CHECK(b(1.0) * std::pow(a, 4) >= 1.0 / 16);
    CHECK(b.s_grid.size() >= 2000);
    CHECK(b.s_max() == doctest::Approx(1 + 1 / (100 * a * a)).epsilon(1e-15));
    // plateau level C a^-2 decreases with a
    CHECK(pr.plateau_C / (a * a) < prev_plateau);
    prev_plateau = pr.plateau_C / (a * a);
  }
  CHECK_THROWS_AS(build_barrier(5), Error);
  BarrierOptions impossible;
  impossible.C = 1;
  try {
    build_barrier(20, impossible);
    FAIL("expected construction failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConstructionFailed);
  }
}

TEST_CASE("ordering checks") {
  auto st = make_state(cylinder_profile(-100, 20, 101), -100);
  std::vector<Snapshot> hist{{st.t, st.profile}};
  evolve(st, -50, {}, [&](const FlowState& s) { hist.push_back({s.t, s.profile}); });
  for (double a : {10.0, 20.0, 40.0}) {
    const auto rep = check_ordering(hist, barrier(a));
    CHECK(rep.status == OrderingStatus::Pass);
    CHECK(rep.t.size() == hist.size());
  }
  const std::vector<Snapshot> sph{{-100, sphere_profile(20, 101)}};
  try {
    check_ordering(sph, barrier(20));
    FAIL("expected inapplicable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Inapplicable);
  }
  // a neck steeper than the barrier is reported at the right place
  auto z = linspace(-10, 10, 201);
  z[100] = 0;
  std::vector<double> f(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = std::sqrt(200.0) * (1 - 0.01 * (1 - std::cos(z[i] / 3)));
  const std::vector<Snapshot> bumpy{{-100, Profile(z, f)}};
  const auto rep = check_ordering(bumpy, barrier(20));
  CHECK(rep.status == OrderingStatus::Violation);
  CHECK(rep.lhs >= rep.rhs);
  CHECK(rep.worst_ratio[0] > 1);
}

TEST_CASE("intermediate gradient bound") {
  // F^2 = -2t - z^2/(2L): the ratio is (M^2 - 2)/(M^2 + C) exactly
  const double t = -std::exp(12.0), L = 12, theta = 0.3, M = 2;
  const double D = std::sqrt(-2 * t * 2 * L);
  auto z = linspace(-D, D, 4001);
  z[2000] = 0;
  std::vector<double> f(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = std::sqrt(std::max(0.0, -2 * t - z[i] * z[i] / (2 * L)));
  f.front() = f.back() = 0;
  const auto rep = intermediate_gradient_bound(Profile(z, f), t, theta, M);
  REQUIRE(rep.z.size() > 100);
  const double C = 2 / (theta * theta);
  for (std::size_t i = 0; i < rep.z.size(); ++i)
    CHECK(rep.ratio[i] == doctest::Approx((M * M - 2) / (M * M + C)).epsilon(1e-3));
  CHECK(rep.pass_fraction == 1.0);
  CHECK(rep.precondition);

  const auto cyl = intermediate_gradient_bound(cylinder_profile(t, 40 * std::sqrt(-t), 401), t, theta, M);
  for (double r : cyl.ratio) CHECK(r == 0.0);

  // default M = 10 leaves the oval's region empty at t = -e^12
  const auto sol = solve_phi(-1.0 / 6);
  const auto oval = intermediate_gradient_bound(oval_ansatz(sol, t), t, 0.3, 10);
  CHECK(oval.z.empty());
  CHECK_FALSE(oval.precondition);
  CHECK(oval.pass_fraction == 1.0);
}

TEST_CASE("barrier csv") {
  std::ostringstream os;
  write_barrier_csv(os, barrier(10));
  const auto s = os.str();
  CHECK(s.rfind("s,psi,N_of_psi\n", 0) == 0);
}
