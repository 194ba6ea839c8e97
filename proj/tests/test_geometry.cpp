#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"
#include "ovals/profile.hpp"

using namespace ovals;
using std::numbers::pi;

namespace {

Profile sphere(double r, std::size_t n) {
  auto z = linspace(-pi * r / 2, pi * r / 2, n);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = r * std::cos(z[i] / r);
  z[n / 2] = 0.0;
  f.front() = f.back() = 0.0;
  return Profile(z, f);
}

Profile cylinder(double radius, double half, std::size_t n) {
  auto z = linspace(-half, half, n);
  z[n / 2] = 0.0;
  return Profile(z, std::vector<double>(n, radius));
}

// hemisphere of radius 1 capping a unit cylinder on the right, open on the left
Profile capped_cylinder(int m) {
  const double cap = pi / 2, h = cap / m;
  std::vector<double> z, f;
  for (int k = 3 * m; k >= 0; --k) {
    const double s = k * h;
    z.push_back(k == m ? 0.0 : cap - s);
    f.push_back(s >= cap ? 1.0 : std::sin(s));
  }
  return Profile(z, f);
}

}  // namespace

TEST_CASE("cylinder curvatures") {
  auto c = curvatures(cylinder(std::sqrt(2.0), 5, 101));
  for (std::size_t i = 0; i < c.R.size(); ++i) {
    CHECK(std::abs(c.k_orb[i] - 0.5) < 1e-11);
    CHECK(std::abs(c.k_rad[i]) < 1e-11);
    CHECK(std::abs(c.R[i] - 1.0) < 1e-11);
  }
}

TEST_CASE("sphere scalar curvature converges at second order") {
  const double r = 2.0;
  double prev = 0;
  for (std::size_t n : {101, 201, 401, 801}) {
    auto p = sphere(r, n);
    auto c = curvatures(p);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(c.R[i] == doctest::Approx(2 * c.k_orb[i] + 4 * c.k_rad[i]).epsilon(1e-15));
      err = std::max(err, std::abs(c.R[i] - 6 / (r * r)));
    }
    if (prev > 0) CHECK(std::log2(prev / err) >= 1.9);
    prev = err;
  }
}

TEST_CASE("tip curvature of the sphere and a capped cylinder") {
  const double r = 3.0;
  auto p = sphere(r, 801);
  CHECK(tip_scalar_curvature(p, Side::Left) == doctest::Approx(6 / (r * r)).epsilon(1e-4));
  CHECK(tip_scalar_curvature(p, Side::Right) == doctest::Approx(6 / (r * r)).epsilon(1e-4));

  double prev = 0;
  for (int m : {400, 800, 1600}) {
    auto q = capped_cylinder(m);
    const double err = std::abs(tip_scalar_curvature(q, Side::Right) - 6.0);
    CHECK(err < 0.05);
    if (prev > 0) CHECK(std::log2(prev / err) >= 1.9);
    prev = err;
  }
  CHECK_THROWS_AS(tip_scalar_curvature(capped_cylinder(400), Side::Left), Error);
}

TEST_CASE("tip fit rejects coarse or conical tips") {
  std::vector<double> z = linspace(-1, 1, 21), f(21);
  z[10] = 0;
  for (std::size_t i = 0; i < 21; ++i) f[i] = 0.5 * (1 - std::abs(z[i]));
  f[10] = 0.5;
  Profile cone(z, f);
  try {
    tip_scalar_curvature(cone, Side::Left);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TipNotResolved);
  }
}

TEST_CASE("neck quality") {
  CHECK(neck_quality(cylinder(1.7, 4, 81), 0.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  const double r = 2.0;
  auto p = sphere(r, 2001);
  double oracle = 0;
  for (double z : p.z())
    if (std::abs(z) <= r / 2) oracle = std::max(oracle, 1 - std::cos(z / r) + std::abs(std::sin(z / r)) + std::cos(z / r));
  CHECK(neck_quality(p, 0.0, r / 2) == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(oracle > 1.47);
  // (z,F) -> (lambda z, lambda F); window placed between nodes
  const double lam = 7.5;
  const double w = 0.5 * (p.z()[1500] + p.z()[1501]);
  std::vector<double> z = p.z(), f = p.f();
  for (auto& v : z) v *= lam;
  for (auto& v : f) v *= lam;
  Profile q(z, f);
  CHECK(neck_quality(q, 0.0, lam * w) == doctest::Approx(neck_quality(p, 0.0, w)).epsilon(1e-9));
  CHECK_THROWS_AS(neck_quality(p, 0.0, 10 * r), Error);
}

TEST_CASE("invariants and validation") {
  auto p = sphere(1.0, 201);
  CHECK(p.check_invariants().ok());
  CHECK(p.end(Side::Left) == EndKind::Tip);
  CHECK(p.r_max() == doctest::Approx(1.0));
  CHECK_THROWS_AS(Profile({0, 1, 2}, {0, 1, 0}), Error);
  CHECK_THROWS_AS(Profile({-2, -1, 1, 0.5, 2}, {0, 1, 1, 1, 0}), Error);
  CHECK_THROWS_AS(Profile({-2, -1, 0.1, 1, 2}, {0, 1, 1, 1, 0}), Error);
  // convex bump violates concavity
  Profile bad({-2, -1, 0, 1, 2}, {0, 0.9, 0.5, 0.9, 0});
  CHECK_FALSE(bad.check_invariants().ok());
}

TEST_CASE("profile csv round trip") {
  auto p = sphere(1.3, 101);
  std::stringstream ss;
  write_profile_csv(ss, p);
  auto q = read_profile_csv(ss);
  REQUIRE(q.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(q.z()[i] == p.z()[i]);
    CHECK(q.f()[i] == p.f()[i]);
  }
  std::stringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_profile_csv(bad), Error);
}
