#include "ovals/heat_kernel.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

namespace {

constexpr double kPi = std::numbers::pi;

// sum over images of the n-th derivative of exp(-a^2/4t) at a = x - y + 4k and
// b = x + y + 4k - 2
struct ImageSums {
  double a[4] = {0, 0, 0, 0};
  double b[4] = {0, 0, 0, 0};
};

ImageSums image_sums(double x, double y, double t, const KernelConfig& cfg) {
  if (!(t > 0)) fail(ErrorKind::Domain, "kernel: t must be positive");
  const int K = image_cutoff(t, cfg.tol);
  ImageSums s;
  auto add = [&](double u, double* out) {
    const double e = u * u / (4 * t);
    if (e > 740) return;  // underflow; also keeps 0 * inf out of the derivative terms
    const double g = std::exp(-e);
    const double it = 1 / t;
    out[0] += g;
    out[1] += -u * 0.5 * it * g;
    out[2] += (u * u * 0.25 * it * it - 0.5 * it) * g;
    out[3] += (-u * u * u * 0.125 * it * it * it + 0.75 * u * it * it) * g;
  };
  for (int k = -K; k <= K; ++k) {
    add(x - y + 4.0 * k, s.a);
    add(x + y + 4.0 * k - 2.0, s.b);
  }
  return s;
}

double norm(double t) { return 1.0 / std::sqrt(4 * kPi * t); }

}  // namespace

int image_cutoff(double t, double tol) {
  return static_cast<int>(std::ceil(std::sqrt(t * std::log(1 / tol)) / 2)) + 2;
}

double kernel(double x, double y, double t, const KernelConfig& cfg) {
  auto s = image_sums(x, y, t, cfg);
  return norm(t) * (s.a[0] - s.b[0]);
}

double kernel_dxx(double x, double y, double t, const KernelConfig& cfg) {
  auto s = image_sums(x, y, t, cfg);
  return norm(t) * (s.a[2] - s.b[2]);
}

double kernel_dy(double x, double y, double t, const KernelConfig& cfg) {
  auto s = image_sums(x, y, t, cfg);
  return norm(t) * (-s.a[1] - s.b[1]);
}

double kernel_dxx_dy(double x, double y, double t, const KernelConfig& cfg) {
  auto s = image_sums(x, y, t, cfg);
  return norm(t) * (-s.a[3] - s.b[3]);
}

double boundary_flux(double x, double t, Boundary side, const KernelConfig& cfg) {
  return kernel_dy(x, side == Boundary::Right ? 1.0 : -1.0, t, cfg);
}

LemmaA1Table lemma_A1_scan(std::size_t n_y, std::size_t n_t) {
  LemmaA1Table tab;
  double c[4] = {0, 0, 0, 0};
  auto ys = linspace(-1 + 1e-3, 1 - 1e-3, n_y);
  for (double y : ys) {
    const double cs = std::cos(kPi * y / 2);
    const double r1 = kernel(0, y, 1) / cs;
    const double r2 = std::abs(kernel_dxx(0, y, 1)) / cs;
    tab.rows.push_back({1, y, r1});
    tab.rows.push_back({2, y, r2});
    c[0] = std::max(c[0], 1 / r1);
    c[1] = std::max(c[1], r2);
  }
  const double l0 = std::log(1e-3);
  for (std::size_t i = 0; i < n_t; ++i) {
    const double t = std::exp(l0 * (1 - static_cast<double>(i) / (n_t - 1.0)));
    const double w3 = std::pow(t, -1.5) * std::exp(-1 / (4 * t));
    const double w7 = std::pow(t, -3.5) * std::exp(-1 / (4 * t));
    const double r3 = -kernel_dy(0, 1, t) / w3;
    const double r4 = std::abs(kernel_dxx_dy(0, 1, t)) / w7;
    tab.rows.push_back({3, t, r3});
    tab.rows.push_back({4, t, r4});
    c[2] = std::max(c[2], 1 / r3);
    c[3] = std::max(c[3], r4);
  }
  tab.C = 1.0;
  for (int k = 0; k < 4; ++k) {
    tab.c[k] = c[k];
    tab.C = std::max(tab.C, c[k]);
  }
  return tab;
}

namespace {

// integral over t in (0,1] of g(t), via u = 1/t on [1, inf)
template <class G>
double time_integral(G g) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double u) {
    if (u > 1e300) return 0.0;
    return g(1 / u) / (u * u);
  };
  return integrator.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-13);
}

template <class G>
double space_integral(G g) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, 15, 1e-13);
}

}  // namespace

Representation representation_solve(const CaloricData& data, double x, const KernelConfig& cfg) {
  if (std::abs(x) > 1) fail(ErrorKind::Domain, "representation_solve: x outside [-1,1]");
  Representation rep;
  const double tol = 1e-8 * (1 + std::abs(data.initial(1)) + std::abs(data.initial(-1)));
  rep.corner_mismatch = std::abs(data.initial(1) - data.right(-1)) > tol ||
                        std::abs(data.initial(-1) - data.left(-1)) > tol;
  auto h1 = [&](double t) { return data.right(-t); };
  auto hm1 = [&](double t) { return data.left(-t); };
  rep.h = space_integral([&](double y) { return kernel(x, y, 1, cfg) * data.initial(y); }) -
          time_integral([&](double t) { return h1(t) * kernel_dy(x, 1, t, cfg); }) +
          time_integral([&](double t) { return hm1(t) * kernel_dy(x, -1, t, cfg); });
  rep.h_xx = space_integral([&](double y) { return kernel_dxx(x, y, 1, cfg) * data.initial(y); }) -
             time_integral([&](double t) { return h1(t) * kernel_dxx_dy(x, 1, t, cfg); }) +
             time_integral([&](double t) { return hm1(t) * kernel_dxx_dy(x, -1, t, cfg); });
  return rep;
}

CaloricData random_caloric_data(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 3> amp{}, phase{};
  for (int k = 0; k < 3; ++k) {
    amp[k] = 2 * unit(rng) - 1;
    phase[k] = 2 * kPi * unit(rng);
  }
  auto g = [amp, phase](double y) {
    double e = 0;
    for (int k = 0; k < 3; ++k) e += amp[k] * std::cos((k + 1) * kPi * (y + 1) / 2 + phase[k]);
    return std::exp(e);
  };
  const double gl = g(-1), gr = g(1);
  const double al = 5 * unit(rng), bl = 5 * unit(rng), ar = 5 * unit(rng), br = 5 * unit(rng);
  CaloricData d;
  d.initial = g;
  d.left = [gl, al, bl](double s) { return gl + bl * (s + 1) + al * (s + 1) * (s + 1); };
  d.right = [gr, ar, br](double s) { return gr + br * (s + 1) + ar * (s + 1) * (s + 1); };
  return d;
}

BoundCheck second_derivative_bound_check(const CaloricData& data, double mu, double C,
                                         const KernelConfig& cfg) {
  if (!(mu > 0 && mu < 1)) fail(ErrorKind::InvalidInput, "bound check: mu must lie in (0,1)");
  double sup_boundary = 0;
  for (double s : linspace(-1, 0, 1001)) {
    const double l = data.left(s), r = data.right(s);
    if (l < 0 || r < 0) fail(ErrorKind::Precondition, "bound check: negative boundary value");
    sup_boundary = std::max({sup_boundary, l, r});
  }
  for (double y : linspace(-1, 1, 1001))
    if (data.initial(y) < 0) fail(ErrorKind::Precondition, "bound check: negative initial value");
  const auto rep = representation_solve(data, 0.0, cfg);
  if (rep.h < -1e-10) fail(ErrorKind::Precondition, "bound check: representation gives negative h(0,0)");
  BoundCheck b;
  b.mu = mu;
  b.lhs = std::abs(rep.h_xx);
  b.rhs = C / (mu * mu) * rep.h + C * std::exp(-1 / (8 * mu)) * sup_boundary;
  b.pass = b.lhs <= b.rhs;
  return b;
}

}  // namespace ovals
