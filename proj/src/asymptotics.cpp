#include "ovals/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ovals/ansatz.hpp"
#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_time(double t, const char* who) {
  if (!(t < 0)) fail(ErrorKind::InvalidInput, std::string(who) + ": need t < 0");
  const double L = std::log(-t);
  if (!(L >= 5)) fail(ErrorKind::Precondition, std::string(who) + ": need log(-t) >= 5");
  return L;
}

// Crossing of F^2 = level2 between nodes k1 and k2 from the quadratic through k0, k1, k2
// (k0 on the inner side of k1); exact when F^2 is quadratic in z.
double level_crossing(const Profile& p, std::size_t k0, std::size_t k1, std::size_t k2, double level2) {
  const auto& z = p.z();
  const auto& f = p.f();
  const double x0 = z[k0], x1 = z[k1], x2 = z[k2];
  const double y0 = f[k0] * f[k0] - level2, y1 = f[k1] * f[k1] - level2, y2 = f[k2] * f[k2] - level2;
  // Newton form y0 + d1 (x - x0) + d2 (x - x0)(x - x1)
  const double d1 = (y1 - y0) / (x1 - x0);
  const double d2 = ((y2 - y1) / (x2 - x1) - d1) / (x2 - x0);
  auto q = [&](double x) { return y0 + d1 * (x - x0) + d2 * (x - x0) * (x - x1); };
  double a = x1, b = x2;
  double qa = q(a);
  if (qa * q(b) > 0) return a + (b - a) * y1 / (y1 - y2);
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b), qm = q(m);
    if ((qm > 0) == (qa > 0)) {
      a = m;
      qa = qm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

TipSide tip_side(const FlowState& s, const BryantSolution& sol, Side side, double window) {
  TipSide out;
  out.velocity_ratio = kNaN;
  const auto& p = s.profile;
  if (p.end(side) != EndKind::Tip) return out;
  double R;
  try {
    R = tip_scalar_curvature(p, side);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::TipNotResolved) return out;
    throw;
  }
  out.resolved = true;
  const double t = s.t, L = std::log(-t);
  const double d = side == Side::Left ? p.d_tip_left() : p.d_tip_right();
  out.distance_ratio = d / (2 * std::sqrt(-t * L));
  out.curvature_ratio = R * (-t) / L;

  const auto& h = s.history;
  if (h.size() >= 3) {
    const auto& a = h[h.size() - 3];
    const auto& b = h[h.size() - 2];
    const auto& c = h.back();
    auto dist = [&](const FlowRecord& r) { return side == Side::Left ? r.d_tip_left : r.d_tip_right; };
    // backward three-point derivative on a nonuniform grid
    const double h1 = b.t - a.t, h2 = c.t - b.t;
    const double deriv = dist(a) * h2 / (h1 * (h1 + h2)) - dist(b) * (h1 + h2) / (h1 * h2) +
                         dist(c) * (h1 + 2 * h2) / (h2 * (h1 + h2));
    if (h1 > 0 && h2 > 0) out.velocity_ratio = -deriv / std::sqrt(R);
  }

  const double mu = std::sqrt(R / sol.tip_scalar_curvature());
  const double s_end = std::min(window, sol.z_of_r.back()) / mu;
  const auto& z = p.z();
  const double zt = side == Side::Left ? z.front() : z.back();
  double eps = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double dist = std::abs(z[i] - zt);
    if (dist > s_end) continue;
    eps = std::max(eps, std::abs(mu * p.f()[i] - sol.B(mu * dist)));
  }
  out.bryant_closeness = eps;
  return out;
}

}  // namespace

ParabolicFit parabolic_fit(const Profile& p, double t, double L) {
  const double ell = log_time(t, "parabolic_fit");
  if (!(L > 0)) fail(ErrorKind::InvalidInput, "parabolic_fit: need L > 0");
  const double half = L * std::sqrt(-t), unit = -t / ell;
  std::vector<double> y, m;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = p.z()[i];
    if (std::abs(z) > half) continue;
    y.push_back(p.f()[i] * p.f()[i] + 2 * t);
    m.push_back(-(z * z + 2 * t) / (2 * ell));
  }
  if (y.size() < 50)
    fail(ErrorKind::Resolution, "parabolic_fit: " + std::to_string(y.size()) + " nodes in |z| <= L sqrt(-t), need 50");
  double ym = 0, mm = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    ym += y[k] * m[k];
    mm += m[k] * m[k];
  }
  ParabolicFit out;
  out.coefficient = ym / mm;
  out.n_points = y.size();
  for (std::size_t k = 0; k < y.size(); ++k) {
    out.residual = std::max(out.residual, std::abs(y[k] - out.coefficient * m[k]) / unit);
    out.unit_residual = std::max(out.unit_residual, std::abs(y[k] - m[k]) / unit);
  }
  return out;
}

IntermediateFit intermediate_fit(const Profile& p, double t, double theta) {
  const double ell = log_time(t, "intermediate_fit");
  if (!(theta > 0 && theta < 0.5)) fail(ErrorKind::InvalidInput, "intermediate_fit: need theta in (0, 1/2)");
  IntermediateFit out;
  out.predicted = 2 * std::sqrt(1 - theta * theta) * std::sqrt(-t * ell);
  const auto& z = p.z();
  const auto& f = p.f();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(z[i]) > out.predicted * (1 + 1e-12)) continue;
    out.deviation = std::max(out.deviation, std::abs(f[i] * f[i] + 2 * t + z[i] * z[i] / (2 * ell)) / (-t));
  }
  const double level2 = 2 * theta * theta * (-t);
  const std::size_t o = p.origin();
  if (!(f[o] * f[o] > level2)) fail(ErrorKind::Region, "intermediate_fit: F < theta sqrt(-2t) at q");
  std::size_t i = o;
  while (i + 1 < p.size() && f[i + 1] * f[i + 1] > level2) ++i;
  if (i + 1 == p.size()) fail(ErrorKind::Region, "intermediate_fit: level set not crossed on the right");
  out.z_right = level_crossing(p, i - 1, i, i + 1, level2);
  i = o;
  while (i > 0 && f[i - 1] * f[i - 1] > level2) --i;
  if (i == 0) fail(ErrorKind::Region, "intermediate_fit: level set not crossed on the left");
  out.z_left = -level_crossing(p, i + 1, i, i - 1, level2);
  out.ratio_left = out.z_left / out.predicted;
  out.ratio_right = out.z_right / out.predicted;
  return out;
}

TipReport tip_report(const FlowState& s, const BryantSolution& sol, double window) {
  if (!(s.t < -1)) fail(ErrorKind::InvalidInput, "tip_report: need t < -1");
  TipReport rep;
  rep.neck_ratio = s.profile.r_max() / std::sqrt(-2 * s.t);
  // a round sphere sits at sqrt 2; the oval approaches 1 from above
  rep.applicable = rep.neck_ratio < 1.2;
  rep.left = tip_side(s, sol, Side::Left, window);
  rep.right = tip_side(s, sol, Side::Right, window);
  return rep;
}

StarCheck check_star(const std::vector<FlowRecord>& history, double alpha, double bound) {
  if (!(alpha > 0 && alpha < 1)) fail(ErrorKind::InvalidInput, "check_star: need alpha in (0,1)");
  if (history.empty()) fail(ErrorKind::Precondition, "check_star: empty history");
  double lo = INFINITY, hi = 0;
  for (const auto& r : history) {
    if (!(r.t < 0)) fail(ErrorKind::InvalidInput, "check_star: need t < 0");
    lo = std::min(lo, -r.t);
    hi = std::max(hi, -r.t);
  }
  if (hi < 10 * lo) fail(ErrorKind::Precondition, "check_star: history spans less than a decade of -t");
  StarCheck out;
  out.t_at_sup = history.front().t;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : history) {
    const double excess = r.r_max / std::sqrt(-2 * r.t) - 1;
    const double v = excess * std::pow(-r.t, alpha);
    if (v > out.sup) {
      out.sup = v;
      out.t_at_sup = r.t;
    }
    // excesses at roundoff level carry no growth information
    if (excess > 1e-10) {
      const double x = std::log(-r.t), y = std::log(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  if (n >= 2) {
    const double den = n * sxx - sx * sx;
    if (den > 0) out.growth = (n * sxy - sx * sy) / den;
  }
  out.pass = out.sup <= bound && out.growth <= 1e-6;
  const auto& last = *std::min_element(history.begin(), history.end(),
                                       [](const FlowRecord& a, const FlowRecord& b) { return -a.t < -b.t; });
  out.diameter_ratio = (last.d_tip_left + last.d_tip_right) / std::pow(-last.t, 1 / (2 * (1 - alpha)));
  return out;
}

double star_gradient_bound(const std::vector<Snapshot>& snapshots, double alpha, double bound) {
  std::vector<FlowRecord> rec;
  for (const auto& s : snapshots)
    rec.push_back({s.t, s.profile.r_max(), s.profile.d_tip_left(), s.profile.d_tip_right(), kNaN, kNaN});
  StarCheck chk;
  try {
    chk = check_star(rec, alpha, bound);
  } catch (const Error& e) {
    fail(ErrorKind::Inapplicable, std::string("star_gradient_bound: ") + e.what());
  }
  if (!chk.pass)
    fail(ErrorKind::Inapplicable, "star_gradient_bound: condition fails for alpha = " + format_double(alpha));
  double worst = 0;
  for (const auto& s : snapshots) {
    const auto& p = s.profile;
    std::vector<double> fz, fzz;
    profile_derivatives(p.z(), p.f(), p.end(Side::Left), p.end(Side::Right), fz, fzz);
    const double w = std::pow(-s.t, alpha / (1 - alpha)), floor = std::sqrt(-s.t);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p.f()[i] >= floor) worst = std::max(worst, fz[i] * fz[i] * w);
  }
  return worst;
}

double bootstrap_map(double alpha) {
  return std::min((1 + alpha * alpha / 200) * alpha, 1.0);
}

std::vector<double> bootstrap_iterates(double alpha0, std::size_t max_steps) {
  if (!(alpha0 > 0 && alpha0 <= 1)) fail(ErrorKind::InvalidInput, "bootstrap_iterates: need alpha0 in (0,1]");
  std::vector<double> out{alpha0};
  while (out.back() < 1 && out.size() <= max_steps) out.push_back(bootstrap_map(out.back()));
  return out;
}

AnsatzResidual ansatz_residual(const BryantSolution& sol, double t, AnsatzPiece piece, double L, double theta) {
  if (!(t <= -std::exp(8.0))) fail(ErrorKind::Precondition, "ansatz_residual: need t <= -e^8");
  const double ell = std::log(-t), rt = std::sqrt(-t);
  const double par = L * rt, inter = 2 * std::sqrt(1 - theta * theta) * std::sqrt(-t * ell);
  Profile p;
  std::function<double(double, double)> value;
  if (piece == AnsatzPiece::Oval) {
    p = oval_ansatz(sol, t);
    value = [&](double tt, double z) { return oval_value(sol, tt, z); };
  } else {
    p = cylinder_profile(t, 1.1 * std::max(par, inter), 2001);
    value = [](double tt, double) { return std::sqrt(-2 * tt); };
  }
  const auto r = rhs(p);
  const double h = 1e-3 * (-t);
  AnsatzResidual out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = p.z()[i];
    if (std::abs(z) > inter || !std::isfinite(r[i])) continue;
    const double dt = (-value(t + 2 * h, z) + 8 * value(t + h, z) - 8 * value(t - h, z) + value(t - 2 * h, z)) / (12 * h);
    const double res = std::abs(r[i] - dt);
    out.intermediate = std::max(out.intermediate, res * rt);
    if (std::abs(z) <= par) out.parabolic = std::max(out.parabolic, res * rt * ell);
  }
  return out;
}

}  // namespace ovals
