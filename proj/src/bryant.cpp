#include "ovals/bryant.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

namespace {

// B, B', f', m = 1 - B'^2 (carried separately: near the tip 1 - B'^2 cancels)
using State = std::array<double, 4>;

// Coefficient of x^m (x = r^2) in the Phi ODE residual for the truncated series p.
double series_residual(const std::vector<double>& p, int m) {
  const int n = static_cast<int>(p.size());
  auto at = [&](int k) { return k >= 0 && k < n ? p[k] : 0.0; };
  double res = 0;
  // Phi Phi''
  for (int k = 1; k <= m + 1; ++k) res += 2.0 * k * (2.0 * k - 1) * at(k) * at(m - (k - 1));
  // -1/2 Phi'^2
  for (int j = 1; j <= m; ++j) {
    const int k = m + 1 - j;
    res -= 0.5 * 4.0 * j * k * at(j) * at(k);
  }
  // r^-2 (1 - Phi)(r Phi' + 2 Phi)
  for (int k = 1; k <= m + 1; ++k) {
    const int j = m - (k - 1);
    res -= at(k) * (2.0 * j + 2.0) * at(j);
  }
  return res;
}

double one_minus_slope2(const State& y) { return y[1] > 0.5 ? y[3] : 1 - y[1] * y[1]; }

double second_derivative(const State& y) { return one_minus_slope2(y) / y[0] + y[2] * y[1]; }

void rhs(const State& y, State& dy, double /*z*/) {
  const double bpp = second_derivative(y);
  dy[0] = y[1];
  dy[1] = bpp;
  dy[2] = 2 * bpp / y[0];
  dy[3] = -2 * y[1] * bpp;
}

}  // namespace

std::vector<double> phi_series(double b0, int order) {
  std::vector<double> p(order + 1, 0.0);
  p[0] = 1.0;
  if (order >= 1) p[1] = b0;
  for (int n = 2; n <= order; ++n) {
    p[n] = 0.0;
    const double r0 = series_residual(p, n - 1);
    p[n] = -r0 / (2.0 * n * (2.0 * n - 1) - 2.0);
  }
  return p;
}

BryantSolution solve_phi(double b0, double r_end, const BryantOptions& opt) {
  namespace ode = boost::numeric::odeint;
  if (!(b0 < 0)) fail(ErrorKind::InvalidInput, "solve_phi: b0 must be negative");
  const double rs = opt.r_start;
  if (!(r_end > 10 * rs)) fail(ErrorKind::InvalidInput, "solve_phi: r_end too small");

  const auto p = phi_series(b0, 3);
  double phi = 0, rdphi_half_plus = 0, dphi = 0, om = 0;
  for (int k = 0; k <= 3; ++k) {
    const double rk = std::pow(rs, 2 * k);
    phi += p[k] * rk;
    if (k >= 1) {
      om -= p[k] * rk;
      rdphi_half_plus += (k + 1.0) * p[k] * rk;  // r Phi'/2 + Phi - 1
      dphi += 2.0 * k * p[k] * std::pow(rs, 2 * k - 1);
    }
  }
  State y{rs, std::sqrt(phi), rdphi_half_plus / (rs * std::sqrt(phi)), om};
  // z(r) = int dr / sqrt(Phi) near the tip
  const double z0 = rs - b0 * rs * rs * rs / 6.0;

  BryantSolution sol;
  sol.b0 = b0;
  sol.r_start = rs;
  const std::size_t n = opt.n_store;
  std::vector<double> targets(n);
  const double lr0 = std::log(rs), lr1 = std::log(r_end);
  for (std::size_t i = 0; i < n; ++i) targets[i] = std::exp(lr0 + (lr1 - lr0) * i / (n - 1.0));
  targets.front() = rs;
  targets.back() = r_end;
  sol.r_grid = targets;
  sol.phi_values.assign(n, 0.0);
  sol.dphi_values.assign(n, 0.0);
  sol.z_of_r.assign(n, 0.0);
  sol.one_minus_phi.assign(n, 0.0);
  sol.one_minus_phi[0] = om;
  sol.phi_values[0] = phi;
  sol.dphi_values[0] = dphi;
  sol.z_of_r[0] = z0;

  auto stepper = ode::make_dense_output(1e-14, opt.rel_tol, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y, z0, 1e-4);
  std::size_t next = 1;
  State tmp;
  while (next < n) {
    auto span = stepper.do_step(rhs);
    const State& cur = stepper.current_state();
    if (!(cur[1] > 0) || !std::isfinite(cur[0])) fail(ErrorKind::Branch, "solve_phi: Phi reached 0 before r_end");
    if (cur[1] > 1 + 1e-9) fail(ErrorKind::Branch, "solve_phi: Phi exceeded 1");
    while (next < n && cur[0] >= targets[next]) {
      // B is increasing in z: bisect the dense output for B = target
      double lo = span.first, hi = span.second;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, tmp);
        (tmp[0] < targets[next] ? lo : hi) = mid;
      }
      const double zz = 0.5 * (lo + hi);
      stepper.calc_state(zz, tmp);
      sol.z_of_r[next] = zz;
      sol.phi_values[next] = tmp[1] * tmp[1];
      sol.one_minus_phi[next] = one_minus_slope2(tmp);
      sol.dphi_values[next] = 2 * second_derivative(tmp);
      ++next;
    }
  }

  // last decade: one-parameter model c0 r^-2 + 2 c0^2 r^-4 (Newton on least squares)
  std::vector<std::size_t> tail;
  for (std::size_t i = 0; i < n; ++i)
    if (sol.r_grid[i] >= r_end / 10) tail.push_back(i);
  double c = sol.phi_values[tail.back()] * r_end * r_end;
  for (int it = 0; it < 50; ++it) {
    double g = 0, h = 0;
    for (std::size_t i : tail) {
      const double r2 = 1.0 / (sol.r_grid[i] * sol.r_grid[i]);
      const double w = 1.0 / (sol.phi_values[i] * sol.phi_values[i]);
      const double e = c * r2 + 2 * c * c * r2 * r2 - sol.phi_values[i];
      const double de = r2 + 4 * c * r2 * r2;
      g += w * e * de;
      h += w * (de * de + e * 4 * r2 * r2);
    }
    const double dc = g / h;
    c -= dc;
    if (std::abs(dc) < 1e-15 * std::abs(c)) break;
  }
  sol.c0 = c;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i : tail) {
    const double x = 1.0 / (sol.r_grid[i] * sol.r_grid[i]);
    const double v = sol.phi_values[i] / x;
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  const double m = static_cast<double>(tail.size());
  sol.tail_d = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  sol.tail_c0_two_param = (sy - sol.tail_d * sx) / m;
  return sol;
}

double BryantSolution::k_orb(std::size_t i) const {
  return one_minus_phi[i] / (r_grid[i] * r_grid[i]);
}

double BryantSolution::k_rad(std::size_t i) const { return -dphi_values[i] / (2 * r_grid[i]); }

double BryantSolution::scalar_curvature(std::size_t i) const { return 2 * k_orb(i) + 4 * k_rad(i); }

double BryantSolution::tip_scalar_curvature() const {
  const double r1 = r_grid[0] * r_grid[0], r2 = r_grid[1] * r_grid[1];
  return (r2 * scalar_curvature(0) - r1 * scalar_curvature(1)) / (r2 - r1);
}

double BryantSolution::B(double z) const {
  if (z < 0) fail(ErrorKind::Domain, "B: negative arclength");
  if (z <= z_of_r.front()) return z + b0 * z * z * z / 6.0;
  if (z > z_of_r.back()) fail(ErrorKind::Domain, "B: beyond the solved range");
  // cubic Hermite with exact slopes sqrt(Phi)
  const std::size_t i = bracket(z_of_r, z);
  const double h = z_of_r[i + 1] - z_of_r[i];
  const double t = (z - z_of_r[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * r_grid[i] + (t3 - 2 * t2 + t) * h * std::sqrt(phi_values[i]) +
         (-2 * t3 + 3 * t2) * r_grid[i + 1] + (t3 - t2) * h * std::sqrt(phi_values[i + 1]);
}

double BryantSolution::dB(double z) const {
  if (z < 0) fail(ErrorKind::Domain, "dB: negative arclength");
  if (z <= z_of_r.front()) return 1 + b0 * z * z / 2.0;
  if (z > z_of_r.back()) fail(ErrorKind::Domain, "dB: beyond the solved range");
  // slope interpolated as a cubic Hermite in z using B'' = Phi'/2
  const std::size_t i = bracket(z_of_r, z);
  const double h = z_of_r[i + 1] - z_of_r[i];
  const double t = (z - z_of_r[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * std::sqrt(phi_values[i]) + (t3 - 2 * t2 + t) * h * 0.5 * dphi_values[i] +
         (-2 * t3 + 3 * t2) * std::sqrt(phi_values[i + 1]) + (t3 - t2) * h * 0.5 * dphi_values[i + 1];
}

double phi_ode_residual(const BryantSolution& sol) {
  // Phi'' by seven-point differences of Phi' in u = log r (smooth, uniform spacing)
  const std::size_t n = sol.r_grid.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::log(sol.r_grid[i]);
  auto d = differentiate(u, sol.dphi_values, 7);
  double worst = 0;
  for (std::size_t i = 3; i + 3 < n; ++i) {
    const double r = sol.r_grid[i], phi = sol.phi_values[i], dphi = sol.dphi_values[i];
    const double ddphi = d.d1[i] / r;
    const double a = phi * ddphi, b = 0.5 * dphi * dphi;
    const double c = sol.one_minus_phi[i] * (r * dphi + 2 * phi) / (r * r);
    worst = std::max(worst, std::abs(a - b + c));
  }
  return worst;
}

double ray_ricci_integral(const BryantSolution& sol) {
  if (std::abs(sol.tip_scalar_curvature() - 1.0) > 1e-6)
    fail(ErrorKind::Normalization, "ray_ricci_integral: solution is not normalized to tip curvature 1");
  const std::size_t n = sol.r_grid.size();
  // near-tip piece: K_rad ~ -b0 on [0, z_start]
  double total = -2 * sol.b0 * sol.z_of_r[0];
  for (std::size_t i = 1; i < n; ++i)
    total += (sol.k_rad(i) + sol.k_rad(i - 1)) * (sol.z_of_r[i] - sol.z_of_r[i - 1]);
  const double r_end = sol.r_grid.back();
  total += std::sqrt(sol.c0) / (r_end * r_end);
  return total;
}

Profile bryant_cap_profile(const BryantSolution& sol, double R_tip, std::size_t n_points, double s_max) {
  if (!(R_tip > 0)) fail(ErrorKind::InvalidInput, "bryant_cap_profile: R_tip must be positive");
  if (n_points < 5) fail(ErrorKind::InvalidInput, "bryant_cap_profile: need >= 5 points");
  // the stored solution has tip curvature -6 b0; rescale onto R_tip
  const double lam = std::sqrt(R_tip / (-6 * sol.b0));
  auto z = linspace(0, s_max, n_points);
  std::vector<double> f(n_points);
  for (std::size_t i = 0; i < n_points; ++i) f[i] = sol.B(lam * z[i]) / lam;
  f[0] = 0.0;
  return Profile(z, f);
}

}  // namespace ovals
