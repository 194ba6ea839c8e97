#include "ovals/barriers.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ovals/error.hpp"

namespace ovals {

namespace {

using State = std::array<double, 2>;

struct Shot {
  bool survived = false;
  double psi_09 = 0;  // psi(0.9)
  std::vector<double> psi;  // at the requested samples
};

// Integrates N[psi] = -eps (psi + A)^2/s^2 from s0 and samples at the increasing points `at`.
Shot shoot(double a, double eps, double slope, const BarrierOptions& opt,
           const std::vector<double>& at) {
  namespace ode = boost::numeric::odeint;
  const double A = 1 / (a * a);
  const double s0 = opt.r_star / a, s1 = 1 + A / 100;
  auto rhs = [&](const State& y, State& dy, double s) {
    const double psi = y[0], d = y[1];
    dy[0] = d;
    dy[1] = (0.5 * d * d - (1 - psi) * (s * d + 2 * psi) / (s * s) + s * d -
             eps * (psi + A) * (psi + A) / (s * s)) /
            psi;
  };
  auto stepper = ode::make_dense_output(1e-18, 1e-12, ode::runge_kutta_dopri5<State>());
  stepper.initialize(State{opt.psi_start, -slope * a}, s0, 1e-3 * s0);
  Shot out;
  out.psi.reserve(at.size());
  std::size_t next = 0;
  bool have_09 = false;
  while (stepper.current_time() < s1) {
    stepper.do_step(rhs);
    const double s = stepper.current_time();
    const State& y = stepper.current_state();
    if (!(y[0] > 0) || !std::isfinite(y[1]) || y[0] > 1e6) return out;
    State tmp;
    if (!have_09 && s >= 0.9) {
      stepper.calc_state(0.9, tmp);
      out.psi_09 = tmp[0];
      have_09 = true;
    }
    while (next < at.size() && at[next] <= std::min(s, s1)) {
      stepper.calc_state(at[next], tmp);
      out.psi.push_back(tmp[0]);
      ++next;
    }
  }
  while (next < at.size()) {
    State tmp;
    stepper.calc_state(std::min(at[next], stepper.current_time()), tmp);
    out.psi.push_back(tmp[0]);
    ++next;
  }
  out.survived = have_09 && std::all_of(out.psi.begin(), out.psi.end(), [](double v) { return v > 0; });
  return out;
}

double tail_coefficient(double a, double psi_09) {
  return a * a * psi_09 / (1 / 0.81 - 1);
}

std::vector<double> graded_grid(double s0, double s1, std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    s[i] = s0 + (s1 - s0) * (u - 0.9 * std::sin(2 * std::numbers::pi * u) / (2 * std::numbers::pi));
  }
  s.front() = s0;
  s.back() = s1;
  return s;
}

}  // namespace

BarrierFunction::BarrierFunction(double a_, double r_star_, std::vector<double> s,
                                 std::vector<double> psi)
    : a(a_), r_star(r_star_), s_grid(std::move(s)), psi_values(std::move(psi)) {
  if (s_grid.size() != psi_values.size() || s_grid.size() < 3)
    fail(ErrorKind::InvalidInput, "BarrierFunction: grid and values must match");
  interp_ = Pchip(s_grid, psi_values);
}

double BarrierFunction::operator()(double s) const {
  if (s < s_min() || s > s_max()) fail(ErrorKind::Domain, "barrier: s outside the domain");
  return interp_(s);
}

double barrier_operator(double s, double psi, double dpsi, double d2psi) {
  return psi * d2psi - 0.5 * dpsi * dpsi + (1 - psi) * (s * dpsi + 2 * psi) / (s * s) - s * dpsi;
}

BarrierFunction build_barrier(double a, const BarrierOptions& opt) {
  if (!(a >= 10)) fail(ErrorKind::InvalidInput, "build_barrier: need a >= 10");
  const double A = 1 / (a * a);
  const auto grid = graded_grid(opt.r_star / a, 1 + A / 100, opt.n_grid);
  std::string why = "no eps tried";
  for (double eps : opt.eps_grid) {
    // the tail coefficient falls as the initial slope steepens; a shot that dies
    // before s = 0.9 counts as too steep
    double lo = 0.25, hi = 4.0;
    auto tail = [&](double p) {
      const auto sh = shoot(a, eps, p, opt, {});
      return sh.psi_09 > 0 ? tail_coefficient(a, sh.psi_09) : 0.0;
    };
    if (!(tail(lo) > opt.tail_target) || !(tail(hi) < opt.tail_target)) {
      why = "tail target not bracketed for eps = " + format_double(eps);
      continue;
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail(mid) > opt.tail_target ? lo : hi) = mid;
    }
    const auto sh = shoot(a, eps, hi, opt, grid);
    if (!sh.survived) {
      why = "psi reached 0 for eps = " + format_double(eps);
      continue;
    }
    BarrierFunction b(a, opt.r_star, grid, sh.psi);
    b.eps = eps;
    b.slope = hi;
    const auto props = verify_properties(b, opt);
    if (props.ok()) return b;
    why = "eps = " + format_double(eps) + ": max N " + format_double(props.max_N) + ", C " +
          format_double(props.plateau_C) + ", min a^4 psi " + format_double(props.min_psi_a4) +
          ", outer margin " + format_double(props.outer_margin_a4);
  }
  fail(ErrorKind::ConstructionFailed, "build_barrier(a = " + format_double(a) + "): " + why);
}

std::vector<double> barrier_residual(std::span<const double> s, std::span<const double> psi) {
  const std::size_t n = s.size();
  if (psi.size() != n || n < 3) fail(ErrorKind::InvalidInput, "barrier_residual: bad grid");
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = barrier_operator(s[i], psi[i], d1_centered(s, psi, i), d2_centered(s, psi, i));
  return out;
}

double verify_supersolution(std::span<const double> s, std::span<const double> psi) {
  const auto N = barrier_residual(s, psi);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < N.size(); ++i) m = std::max(m, N[i]);
  return m;
}

double verify_supersolution(const BarrierFunction& b) {
  return verify_supersolution(b.s_grid, b.psi_values);
}

BarrierProperties verify_properties(const BarrierFunction& b, const BarrierOptions& opt) {
  const double a = b.a, A = 1 / (a * a);
  BarrierProperties r;
  r.max_N = verify_supersolution(b);
  r.min_psi_a4 = std::numeric_limits<double>::infinity();
  r.outer_margin_a4 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.s_grid.size(); ++i) {
    const double s = b.s_grid[i], p = b.psi_values[i];
    r.min_psi_a4 = std::min(r.min_psi_a4, p / (A * A));
    if (s >= 0.1) r.plateau_C = std::max(r.plateau_C, p / A);
    if (s >= 1 - opt.theta)
      r.outer_margin_a4 = std::min(r.outer_margin_a4, (p - A * (1 / (s * s) - 1)) / (A * A) - 1.0 / 16);
  }
  r.psi_inner = b.psi_values.front();
  r.supersolution = r.max_N < 0;
  r.upper = r.plateau_C <= opt.C;
  r.floor = r.min_psi_a4 >= 1.0 / 32;
  r.inner = r.psi_inner >= 1.5;
  r.outer = r.outer_margin_a4 >= 0;
  return r;
}

OrderingReport check_ordering(const std::vector<Snapshot>& history, const BarrierFunction& b,
                              double time_shift) {
  OrderingReport rep;
  const double bound = 1 + 1 / (100 * b.a * b.a);
  for (const auto& snap : history) {
    const double w = std::sqrt(-2 * snap.t + time_shift);
    if (!(w > 0)) fail(ErrorKind::Domain, "check_ordering: -2t + shift must be positive");
    if (snap.profile.r_max() / w > bound)
      fail(ErrorKind::Inapplicable, "check_ordering: r_max/sqrt(-2t) = " +
                                        format_double(snap.profile.r_max() / w) + " exceeds 1 + a^-2/100 at t = " +
                                        format_double(snap.t));
  }
  for (const auto& snap : history) {
    const auto& p = snap.profile;
    const double w = std::sqrt(-2 * snap.t + time_shift);
    std::vector<double> fz, fzz;
    profile_derivatives(p.z(), p.f(), p.end(Side::Left), p.end(Side::Right), fz, fzz);
    double worst = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double F = p.f()[i];
      if (F < b.r_star / b.a * w || !(F > 0)) continue;
      const double s = std::min(F / w, b.s_max());
      const double lhs = fz[i] * fz[i], rhs = b(s);
      worst = std::max(worst, lhs / rhs);
      if (!(lhs < rhs) && rep.status == OrderingStatus::Pass) {
        rep.status = OrderingStatus::Violation;
        rep.t_violation = snap.t;
        rep.z_violation = p.z()[i];
        rep.lhs = lhs;
        rep.rhs = rhs;
      }
    }
    rep.t.push_back(snap.t);
    rep.worst_ratio.push_back(worst);
  }
  return rep;
}

GradientBoundReport intermediate_gradient_bound(const Profile& p, double t, double theta, double M,
                                                double C) {
  if (!(t < -1) || !(theta > 0 && theta < 1) || !(M * M > 2))
    fail(ErrorKind::InvalidInput, "intermediate_gradient_bound: need t < -1, theta in (0,1), M^2 > 2");
  if (C < 0) C = 2 / (theta * theta);
  const double L = std::log(-t);
  GradientBoundReport rep;
  rep.precondition = L > M * M;
  std::vector<double> fz, fzz;
  profile_derivatives(p.z(), p.f(), p.end(Side::Left), p.end(Side::Right), fz, fzz);
  const double factor = (M * M + C) / (M * M - 2) / (2 * L);
  std::size_t good = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = p.z()[i], F = p.f()[i];
    if (std::abs(z) < M * std::sqrt(-t) || F < theta * std::sqrt(-2 * t) || !(F > 0)) continue;
    const double rhs = factor * (-2 * t / (F * F) - 1);
    const double lhs = fz[i] * fz[i];
    // slopes below 1e-10 are roundoff on a flat profile
    const double ratio = lhs < 1e-20 ? 0.0 : rhs > 0 ? lhs / rhs : INFINITY;
    rep.z.push_back(z);
    rep.ratio.push_back(ratio);
    if (ratio <= 1) ++good;
  }
  if (!rep.z.empty()) rep.pass_fraction = static_cast<double>(good) / static_cast<double>(rep.z.size());
  return rep;
}

void write_barrier_csv(std::ostream& os, const BarrierFunction& b) {
  const auto N = barrier_residual(b.s_grid, b.psi_values);
  os << "s,psi,N_of_psi\n";
  for (std::size_t i = 0; i < b.s_grid.size(); ++i) {
    os << format_double(b.s_grid[i]) << ',' << format_double(b.psi_values[i]) << ',';
    if (i > 0 && i + 1 < b.s_grid.size()) os << format_double(N[i]);
    os << '\n';
  }
}

}  // namespace ovals
