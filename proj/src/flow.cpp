#include "ovals/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxWarnings = 100;

struct Geometry {
  std::vector<double> fz, fzz, ratio, v;
};

// F_z, F_zz, F_zz/F (tip limits filled in) and the material velocity at every node.
void geometry(const std::vector<double>& z, const std::vector<double>& f, EndKind left,
              EndKind right, std::size_t origin, std::size_t band, Geometry& g) {
  const std::size_t n = z.size();
  profile_derivatives(z, f, left, right, g.fz, g.fzz, band);
  g.ratio.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.ratio[i] = f[i] > 0 ? g.fzz[i] / f[i] : 0.0;
  if (left == EndKind::Tip) g.ratio[0] = even_extrapolate_to_tip(z, g.ratio, Side::Left);
  if (right == EndKind::Tip) g.ratio[n - 1] = even_extrapolate_to_tip(z, g.ratio, Side::Right);
  g.v = cumulative_trapezoid(z, g.ratio, origin);
  for (double& x : g.v) x *= 2;
}

// Material rates: dz = v, dr = F_zz - (1 - F_z^2)/F, with the radius pinned at tips.
void material_rates(const std::vector<double>& z, const std::vector<double>& f, EndKind left,
                    EndKind right, std::size_t origin, std::size_t band, Geometry& g,
                    std::vector<double>& dz, std::vector<double>& dr) {
  geometry(z, f, left, right, origin, band, g);
  const std::size_t n = z.size();
  dz = g.v;
  dr.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    dr[i] = f[i] > 0 ? g.fzz[i] - (1 - g.fz[i] * g.fz[i]) / f[i] : 0.0;
  if (left == EndKind::Tip) dr[0] = 0;
  if (right == EndKind::Tip) dr[n - 1] = 0;
}

bool admissible(const std::vector<double>& z, const std::vector<double>& f) {
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(z[i]) || !std::isfinite(f[i])) return false;
    if (i > 0 && !(z[i] > z[i - 1])) return false;
    if (i > 0 && i + 1 < n && !(f[i] > 0)) return false;
  }
  return true;
}

// Moves a tip so that F = s + a s^3 passes through the two nearest nodes, which
// pins F_z = 1 there. Left free, the tip drifts: a lagging tip makes the first cell
// convex and the convexity pushes it further out.
bool reposition_tip(std::vector<double>& z, const std::vector<double>& f, Side side) {
  const std::size_t n = z.size();
  const std::size_t i0 = side == Side::Left ? 0 : n - 1;
  const std::size_t i1 = side == Side::Left ? 1 : n - 2;
  const std::size_t i2 = side == Side::Left ? 2 : n - 3;
  const double sgn = side == Side::Left ? 1.0 : -1.0;
  auto resid = [&](double zt) {
    const double s1 = sgn * (z[i1] - zt), s2 = sgn * (z[i2] - zt);
    return (f[i1] - s1) * s2 * s2 * s2 - (f[i2] - s2) * s1 * s1 * s1;
  };
  double zt = z[i0];
  for (int it = 0; it < 30; ++it) {
    const double h = 1e-7 * (1 + std::abs(z[i1] - z[i0]));
    const double r = resid(zt);
    const double d = (resid(zt + h) - resid(zt - h)) / (2 * h);
    if (!(d != 0) || !std::isfinite(d)) return false;
    const double step = r / d;
    zt -= step;
    if (std::abs(step) <= 1e-14 * (1 + std::abs(zt))) break;
  }
  if (!std::isfinite(zt) || !(sgn * (z[i1] - zt) > 0)) return false;
  z[i0] = zt;
  return true;
}

double min_cell(const std::vector<double>& z) {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < z.size(); ++i) h = std::min(h, z[i] - z[i - 1]);
  return h;
}

FlowRecord record(const Profile& p, double t) {
  auto tip = [&](Side s) {
    if (p.end(s) != EndKind::Tip) return kNaN;
    try {
      return tip_scalar_curvature(p, s);
    } catch (const Error&) {
      return kNaN;
    }
  };
  return {t, p.r_max(), p.d_tip_left(), p.d_tip_right(), tip(Side::Left), tip(Side::Right)};
}

void warn(FlowState& s, std::string what) {
  if (s.warnings.size() < kMaxWarnings) s.warnings.push_back({s.t, std::move(what)});
}

}  // namespace

FlowState make_state(Profile p, double t) {
  if (!(t < 0)) fail(ErrorKind::Domain, "flow: time must be negative");
  FlowState s;
  s.profile = std::move(p);
  s.t = t;
  s.reference_mesh = mesh_fractions(s.profile);
  s.history.push_back(record(s.profile, t));
  return s;
}

std::vector<double> rhs(const Profile& p, RhsForm form) {
  const auto& z = p.z();
  const auto& f = p.f();
  const std::size_t n = z.size();
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!(f[i] > 0)) fail(ErrorKind::Singular, "rhs: F <= 0 at an interior node");
  Geometry g;
  geometry(z, f, p.end(Side::Left), p.end(Side::Right), p.origin(), SIZE_MAX, g);
  std::vector<double> out(n);
  if (form == RhsForm::Raw) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = f[i] > 0 ? g.fzz[i] - (1 - g.fz[i] * g.fz[i]) / f[i] : 0.0;
      out[i] = r - g.fz[i] * g.v[i];
    }
    return out;
  }
  std::vector<double> q(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) q[i] = g.fz[i] * g.fz[i] / (f[i] * f[i]);
  // the integrand blows up at a tip; those end cells are not used
  const std::size_t o = p.origin();
  std::vector<double> I(n, kNaN);
  I[o] = 0;
  for (std::size_t i = o + 1; i + 1 < n; ++i) I[i] = I[i - 1] + 0.5 * (z[i] - z[i - 1]) * (q[i] + q[i - 1]);
  for (std::size_t i = o; i-- > 1;) I[i] = I[i + 1] - 0.5 * (z[i + 1] - z[i]) * (q[i] + q[i + 1]);
  if (p.end(Side::Left) == EndKind::Open) I[0] = I[1] - 0.5 * (z[1] - z[0]) * (q[0] + q[1]);
  if (p.end(Side::Right) == EndKind::Open)
    I[n - 1] = I[n - 2] + 0.5 * (z[n - 1] - z[n - 2]) * (q[n - 1] + q[n - 2]);
  const double b = g.fz[o] / f[o];
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f[i] > 0)) {
      out[i] = kNaN;
      continue;
    }
    out[i] = g.fzz[i] - (1 + g.fz[i] * g.fz[i]) / f[i] + 2 * g.fz[i] * (b - I[i]);
  }
  return out;
}

double material_velocity(const Profile& p, double z) {
  const auto& zs = p.z();
  const auto& f = p.f();
  if (z < zs.front() || z > zs.back()) fail(ErrorKind::Domain, "material_velocity: z outside the domain");
  if ((z == zs.front() && f.front() == 0) || (z == zs.back() && f.back() == 0))
    fail(ErrorKind::Singular, "material_velocity: path reaches F = 0");
  Geometry g;
  geometry(zs, f, p.end(Side::Left), p.end(Side::Right), p.origin(), SIZE_MAX, g);
  const std::size_t i = bracket(zs, z);
  const double u = (z - zs[i]) / (zs[i + 1] - zs[i]);
  const double rz = g.ratio[i] + u * (g.ratio[i + 1] - g.ratio[i]);
  return g.v[i] + (z - zs[i]) * (g.ratio[i] + rz);
}

double advance(FlowState& s, const StepControl& ctl, double t_stop) {
  if (!(ctl.cfl_safety > 0 && ctl.cfl_safety < 1) || !(ctl.dt_max > 0))
    fail(ErrorKind::Configuration, "step: need cfl_safety in (0,1) and dt_max > 0");
  const Profile& p = s.profile;
  const EndKind left = p.end(Side::Left), right = p.end(Side::Right);
  const std::size_t o = p.origin(), n = p.size();
  const auto& z0 = p.z();
  const auto& f0 = p.f();
  const double h = min_cell(z0);
  double dt = std::min({ctl.dt_max, ctl.cfl_safety * h * h / 2, t_stop - s.t});
  if (!(dt > 0) || !(s.t + dt < 0)) fail(ErrorKind::Domain, "step: t + dt must stay negative");

  Geometry g;
  std::vector<double> k1z, k1r, k2z, k2r, k3z, k3r, k4z, k4r, zt(n), ft(n), zn(n), fn(n);
  for (int attempt = 0; attempt <= 5; ++attempt, dt *= 0.5) {
    bool ok = true;
    auto stage = [&](const std::vector<double>* bz, const std::vector<double>* br, double c,
                     std::vector<double>& kz, std::vector<double>& kr) {
      if (!ok) return;
      if (bz) {
        for (std::size_t i = 0; i < n; ++i) {
          zt[i] = z0[i] + c * dt * (*bz)[i];
          ft[i] = f0[i] + c * dt * (*br)[i];
        }
        zt[o] = 0;
        if (!admissible(zt, ft)) {
          ok = false;
          return;
        }
        material_rates(zt, ft, left, right, o, ctl.band, g, kz, kr);
      } else {
        material_rates(z0, f0, left, right, o, ctl.band, g, kz, kr);
      }
    };
    stage(nullptr, nullptr, 0, k1z, k1r);
    stage(&k1z, &k1r, 0.5, k2z, k2r);
    stage(&k2z, &k2r, 0.5, k3z, k3r);
    stage(&k3z, &k3r, 1.0, k4z, k4r);
    if (!ok) continue;
    for (std::size_t i = 0; i < n; ++i) {
      zn[i] = z0[i] + dt / 6 * (k1z[i] + 2 * k2z[i] + 2 * k3z[i] + k4z[i]);
      fn[i] = f0[i] + dt / 6 * (k1r[i] + 2 * k2r[i] + 2 * k3r[i] + k4r[i]);
    }
    zn[o] = 0;
    if (left == EndKind::Tip) fn[0] = 0;
    if (right == EndKind::Tip) fn[n - 1] = 0;
    if (!admissible(zn, fn)) continue;
    if (left == EndKind::Tip && !reposition_tip(zn, fn, Side::Left)) continue;
    if (right == EndKind::Tip && !reposition_tip(zn, fn, Side::Right)) continue;
    for (double& v : fn) v = std::max(v, 0.0);
    // the final step lands on t_stop exactly
    s.t = dt == t_stop - s.t ? t_stop : s.t + dt;
    s.profile = Profile(std::move(zn), std::move(fn));
    ++s.steps;
    if (ctl.regrid_threshold > 0 && !s.reference_mesh.empty() &&
        mesh_drift(s.profile, s.reference_mesh) > std::log1p(ctl.regrid_threshold)) {
      s.profile = regrid(s.profile, s.reference_mesh);
      ++s.regrids;
    }
    const auto inv = s.profile.check_invariants();
    if (inv.concavity_excess > 0) warn(s, "concavity loss " + format_double(inv.concavity_excess));
    if (inv.slope_excess > 0) warn(s, "slope bound exceeded " + format_double(inv.slope_excess));
    s.history.push_back(record(s.profile, s.t));
    return dt;
  }
  fail(ErrorKind::Stiffness, "step: rejected after 5 halvings at t = " + format_double(s.t));
}

FlowState step(const FlowState& s, const StepControl& ctl, double t_stop) {
  FlowState out = s;
  advance(out, ctl, t_stop);
  return out;
}

void evolve(FlowState& s, double t_end, const StepControl& ctl,
            const std::function<void(const FlowState&)>& observer) {
  if (!(t_end < 0)) fail(ErrorKind::Domain, "evolve: t_end must be negative");
  while (s.t < t_end) {
    advance(s, ctl, t_end);
    if (observer) observer(s);
  }
}

std::vector<double> mesh_fractions(const Profile& p) {
  const auto& z = p.z();
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] < 0 ? z[i] / -z.front() : z[i] / z.back();
  return out;
}

namespace {
std::vector<double> scaled_mesh(const Profile& p, const std::vector<double>& fr) {
  if (fr.size() != p.size() || fr[p.origin()] != 0)
    fail(ErrorKind::InvalidInput, "regrid: reference mesh does not match the profile");
  const double a = -p.z().front(), b = p.z().back();
  std::vector<double> z(fr.size());
  for (std::size_t i = 0; i < fr.size(); ++i) z[i] = fr[i] < 0 ? fr[i] * a : fr[i] * b;
  z.front() = p.z().front();
  z.back() = p.z().back();
  return z;
}
}  // namespace

double mesh_drift(const Profile& p, const std::vector<double>& fr) {
  const auto ref = scaled_mesh(p, fr);
  const auto& z = p.z();
  double d = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    d = std::max(d, std::abs(std::log((z[i] - z[i - 1]) / (ref[i] - ref[i - 1]))));
  return d;
}

Profile regrid(const Profile& p, const std::vector<double>& fr) {
  auto zn = scaled_mesh(p, fr);
  const Pchip fp(p.z(), p.f());
  std::vector<double> fn(zn.size());
  for (std::size_t i = 0; i < zn.size(); ++i) fn[i] = std::max(0.0, fp(zn[i]));
  fn.front() = p.f().front();
  fn.back() = p.f().back();
  return Profile(std::move(zn), std::move(fn));
}

RmaxCheck rmax_derivative_check(const std::vector<FlowRecord>& h, double tol) {
  RmaxCheck out;
  if (h.size() < 3) return out;
  for (std::size_t k = 1; k + 1 < h.size(); ++k) {
    const double d = (h[k + 1].r_max * h[k + 1].r_max - h[k - 1].r_max * h[k - 1].r_max) /
                     (h[k + 1].t - h[k - 1].t);
    out.t.push_back(h[k].t);
    out.value.push_back(-0.5 * d);
    if (-0.5 * d < 1 - tol) out.flagged = true;
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<FlowRecord>& history) {
  os << "t,r_max,d_tip_left,d_tip_right,R_tip_left,R_tip_right\n";
  for (const auto& r : history)
    os << format_double(r.t) << ',' << format_double(r.r_max) << ',' << format_double(r.d_tip_left)
       << ',' << format_double(r.d_tip_right) << ',' << format_double(r.R_tip_left) << ','
       << format_double(r.R_tip_right) << '\n';
}

}  // namespace ovals
