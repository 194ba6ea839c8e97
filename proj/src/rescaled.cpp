#include "ovals/rescaled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "ovals/error.hpp"

namespace ovals {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t origin_index(std::span<const double> xi) {
  auto it = std::find(xi.begin(), xi.end(), 0.0);
  if (it == xi.end()) fail(ErrorKind::Domain, "rescaled: grid must contain xi = 0");
  return static_cast<std::size_t>(it - xi.begin());
}

double weight(double xi) { return std::exp(-0.25 * xi * xi); }

}  // namespace

double RescaledProfile::value(double xi) const {
  if (xi < xi_grid.front()) return left == EndKind::Tip ? -kSqrt2 : g_values.front();
  if (xi > xi_grid.back()) return right == EndKind::Tip ? -kSqrt2 : g_values.back();
  return interp(xi);
}

double RescaledProfile::rho_max() const {
  const std::size_t i = argmax(g_values);
  if (i == 0 || i + 1 == g_values.size()) return g_values[i];
  // vertex of the parabola through the three nodes around the max
  const double x0 = xi_grid[i - 1], x1 = xi_grid[i], x2 = xi_grid[i + 1];
  const double y0 = g_values[i - 1], y1 = g_values[i], y2 = g_values[i + 1];
  const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
  const double a = (d2 - d1) / (x2 - x0);
  if (!(a < 0)) return y1;
  const double b = d1 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2 * a), x0, x2);
  return std::max(y1, y0 + (xv - x0) * (d1 + a * (xv - x1)));
}

double RescaledProfile::g_at_origin() const { return value(0.0); }

RescaledProfile make_rescaled(std::vector<double> xi, std::vector<double> g, double tau,
                              EndKind left, EndKind right) {
  if (xi.size() != g.size() || xi.size() < 3)
    fail(ErrorKind::InvalidInput, "rescaled: need >= 3 matching samples");
  RescaledProfile r;
  r.interp = Pchip(xi, g);
  r.xi_grid = std::move(xi);
  r.g_values = std::move(g);
  r.tau = tau;
  r.left = left;
  r.right = right;
  r.delta = snapshot_delta(r);
  return r;
}

RescaledProfile to_rescaled(const Profile& p, double t) {
  if (!(t < 0)) fail(ErrorKind::Domain, "to_rescaled: need t < 0");
  const double s = std::sqrt(-t);
  std::vector<double> xi(p.size()), g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    xi[i] = p.z()[i] / s;
    g[i] = p.f()[i] / s - kSqrt2;
  }
  xi[p.origin()] = 0.0;
  return make_rescaled(std::move(xi), std::move(g), -std::log(-t), p.end(Side::Left),
                       p.end(Side::Right));
}

RescaledProfile to_rescaled(const Profile& p, double t, std::span<const double> xi_grid) {
  if (!(t < 0)) fail(ErrorKind::Domain, "to_rescaled: need t < 0");
  const double s = std::sqrt(-t);
  Pchip f(p.z(), p.f());
  std::vector<double> g(xi_grid.size());
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    const double z = xi_grid[i] * s;
    if (z < p.z().front() || z > p.z().back())
      fail(ErrorKind::Domain, "to_rescaled: requested xi outside the profile's domain");
    g[i] = f(z) / s - kSqrt2;
  }
  const bool left_tip = p.end(Side::Left) == EndKind::Tip && xi_grid.front() * s == p.z().front();
  const bool right_tip = p.end(Side::Right) == EndKind::Tip && xi_grid.back() * s == p.z().back();
  return make_rescaled(std::vector<double>(xi_grid.begin(), xi_grid.end()), std::move(g),
                       -std::log(-t), left_tip ? EndKind::Tip : EndKind::Open,
                       right_tip ? EndKind::Tip : EndKind::Open);
}

double snapshot_delta(const RescaledProfile& g) {
  return std::abs(g.g_at_origin()) + std::max(0.0, g.rho_max());
}

double DeltaTracker::update(const RescaledProfile& g) {
  const double d = snapshot_delta(g);
  sup_ = seen_ ? std::max(sup_, d) : d;
  seen_ = true;
  return sup_;
}

double chi(double s) {
  const double a = std::abs(s);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  return 1.0 - smoothstep5(2 * a - 1);
}

double CutoffPolicy::radius(double delta) const {
  if (!(delta >= 0)) fail(ErrorKind::InvalidInput, "cutoff: delta must be >= 0");
  if (delta == 0) return std::numeric_limits<double>::infinity();
  return std::max(std::pow(delta, -exponent), floor);
}

std::vector<double> cutoff(const RescaledProfile& g, const CutoffPolicy& policy) {
  if (!(g.delta > 0)) fail(ErrorKind::InvalidInput, "cutoff: delta must be positive");
  const double R = policy.radius(g.delta);
  std::vector<double> out(g.g_values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.g_values[i] * chi(g.xi_grid[i] / R);
  return out;
}

double gaussian_integral(const std::function<double(double)>& f, int n_nodes) {
  const auto rule = gauss_hermite(n_nodes);
  double s = 0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) s += rule.weights[j] * f(2 * rule.nodes[j]);
  return 2 * s;
}

double hermite_norm2(int n) {
  return 2 * std::ldexp(std::tgamma(n + 1.0), n) * std::sqrt(std::numbers::pi);
}

SpectralReport project(const std::function<double(double)>& g_hat, const SpectralOptions& opt) {
  if (opt.n_modes < 2 || opt.n_nodes < 1 || 2 * opt.n_nodes - 1 < 2 * opt.n_modes)
    fail(ErrorKind::Configuration, "project: quadrature order too low for requested N");
  const auto rule = gauss_hermite(opt.n_nodes);
  const std::size_t m = rule.nodes.size();
  std::vector<double> vals(m);
  for (std::size_t j = 0; j < m; ++j) vals[j] = g_hat(2 * rule.nodes[j]);

  SpectralReport rep;
  rep.coeffs.assign(opt.n_modes + 1, 0.0);
  for (int n = 0; n <= opt.n_modes; ++n) {
    double s = 0;
    for (std::size_t j = 0; j < m; ++j) s += rule.weights[j] * vals[j] * hermite(n, rule.nodes[j]);
    rep.coeffs[n] = 2 * s / hermite_norm2(n);
  }
  double total = 0;
  for (std::size_t j = 0; j < m; ++j) total += rule.weights[j] * vals[j] * vals[j];
  rep.gamma_total = 2 * total;
  rep.gamma_plus = rep.coeffs[0] * rep.coeffs[0] * hermite_norm2(0) +
                   rep.coeffs[1] * rep.coeffs[1] * hermite_norm2(1);
  rep.gamma_zero = rep.coeffs[2] * rep.coeffs[2] * hermite_norm2(2);
  rep.gamma_minus = rep.gamma_total - rep.gamma_plus - rep.gamma_zero;
  rep.alpha = rep.coeffs[2] / kSqrt2;
  return rep;
}

SpectralReport project(const RescaledProfile& g, const CutoffPolicy& policy,
                       const SpectralOptions& opt) {
  const double R = policy.radius(g.delta);
  return project([&](double xi) { return g.value(xi) * chi(xi / R); }, opt);
}

std::vector<double> apply_L(std::span<const double> xi, std::span<const double> g, int width) {
  const auto d = differentiate(xi, g, width);
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = d.d2[i] - 0.5 * xi[i] * d.d1[i] + g[i];
  return out;
}

double linearization_residual(const RescaledProfile& prev, const RescaledProfile& next, double dtau,
                              const CutoffPolicy& policy) {
  if (dtau == 0 || !std::isfinite(dtau)) fail(ErrorKind::InvalidInput, "linearization_residual: dtau = 0");
  const std::size_t n = prev.xi_grid.size();
  if (next.xi_grid.size() != n) fail(ErrorKind::InvalidInput, "linearization_residual: grids differ");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(prev.xi_grid[i] - next.xi_grid[i]) > 1e-12 * (1 + std::abs(prev.xi_grid[i])))
      fail(ErrorKind::InvalidInput, "linearization_residual: grids differ");
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (prev.g_values[i] + next.g_values[i]);
  const auto Lg = apply_L(prev.xi_grid, mid, 5);
  const double R = policy.radius(next.delta);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = prev.xi_grid[i];
    if (std::abs(xi) > R) continue;
    const double e = (next.g_values[i] - prev.g_values[i]) / dtau - Lg[i];
    x.push_back(xi);
    y.push_back(weight(xi) * e * e);
  }
  return x.size() < 2 ? 0.0 : trapezoid(x, y);
}

std::vector<double> nonlinear_source(const Profile& p, double t) {
  if (!(t < 0)) fail(ErrorKind::Domain, "nonlinear_source: need t < 0");
  const double s = std::sqrt(-t);
  const auto& z = p.z();
  const auto& f = p.f();
  const std::size_t n = z.size();
  std::vector<double> fz, fzz;
  profile_derivatives(z, f, p.end(Side::Left), p.end(Side::Right), fz, fzz);
  std::vector<double> ratio(n), orb(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] > 0) {
      ratio[i] = fzz[i] / f[i];
      orb[i] = (1 - fz[i] * fz[i]) / f[i];
    }
  }
  if (p.end(Side::Left) == EndKind::Tip) ratio[0] = even_extrapolate_to_tip(z, ratio, Side::Left);
  if (p.end(Side::Right) == EndKind::Tip)
    ratio[n - 1] = even_extrapolate_to_tip(z, ratio, Side::Right);
  const auto I = cumulative_trapezoid(z, ratio, p.origin());
  std::vector<double> E(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double H = f[i] / s;
    E[i] = 0.5 * H - s * orb[i] - 2 * fz[i] * s * I[i] - (H - kSqrt2);
  }
  return E;
}

std::vector<double> nonlinear_source(const RescaledProfile& g, int width) {
  const auto& xi = g.xi_grid;
  const auto& G = g.g_values;
  const std::size_t n = xi.size();
  for (double v : G)
    if (!(v > -kSqrt2)) fail(ErrorKind::Domain, "nonlinear_source: G must stay above -sqrt 2");
  const auto d = differentiate(xi, G, width);
  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) ratio[i] = d.d2[i] / (kSqrt2 + G[i]);
  const auto I = cumulative_trapezoid(xi, ratio, origin_index(xi));
  std::vector<double> E(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double H = kSqrt2 + G[i];
    E[i] = 0.5 * H - (1 - d.d1[i] * d.d1[i]) / H - 2 * d.d1[i] * I[i] - G[i];
  }
  return E;
}

NeutralProjection neutral_source_projection(const RescaledProfile& g, std::span<const double> E,
                                            const CutoffPolicy& policy,
                                            const SpectralOptions& opt) {
  if (E.size() != g.xi_grid.size()) fail(ErrorKind::InvalidInput, "neutral_source_projection: size mismatch");
  const double R = policy.radius(g.delta);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < E.size(); ++i) {
    const double xi = g.xi_grid[i];
    if (std::abs(xi) > R) continue;
    x.push_back(xi);
    y.push_back(weight(xi) * E[i] * (xi * xi - 2));
  }
  NeutralProjection out;
  out.value = x.size() < 2 ? 0.0 : trapezoid(x, y);
  out.alpha = g.delta > 0 ? project(g, policy, opt).alpha : 0.0;
  out.predicted = -128 * std::sqrt(2 * std::numbers::pi) * out.alpha * out.alpha;
  return out;
}

AlphaFit alpha_ode_fit(std::span<const double> tau, std::span<const double> alpha) {
  const std::size_t n = tau.size();
  if (n < 10 || alpha.size() != n) fail(ErrorKind::InvalidInput, "alpha_ode_fit: need >= 10 samples");
  const bool pos = alpha[0] > 0;
  for (double a : alpha)
    if (!(pos ? a > 0 : a < 0)) fail(ErrorKind::Unfit, "alpha_ode_fit: alpha changes sign in window");
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += tau[i];
    my += 1 / alpha[i];
  }
  mt /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (tau[i] - mt) * (1 / alpha[i] - my);
    sxx += (tau[i] - mt) * (tau[i] - mt);
  }
  if (!(sxx > 0)) fail(ErrorKind::Unfit, "alpha_ode_fit: tau values coincide");
  AlphaFit fit;
  fit.kappa = -sxy / sxx;
  for (std::size_t i = 0; i < n; ++i)
    fit.sup_deviation = std::max(fit.sup_deviation, std::abs(8 * tau[i] * alpha[i] - 1));
  return fit;
}

std::string to_string(ModeDominance m) {
  switch (m) {
    case ModeDominance::PositiveDominates: return "PositiveDominates";
    case ModeDominance::NeutralDominates: return "NeutralDominates";
    case ModeDominance::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

ModeDominance classify_modes(std::span<const double> gp, std::span<const double> g0,
                             std::span<const double> gm, const ClassifierOptions& opt) {
  const std::size_t n = gp.size();
  if (n < 2 || g0.size() != n || gm.size() != n)
    fail(ErrorKind::InvalidInput, "classify_modes: need matching sequences of length >= 2");
  for (std::size_t k = 0; k < n; ++k)
    if (!(gp[k] >= 0 && g0[k] >= 0 && gm[k] >= 0) || !std::isfinite(gp[k] + g0[k] + gm[k]))
      fail(ErrorKind::InvalidInput, "classify_modes: sequences must be finite and nonnegative");
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (gm[k + 1] > gm[k] * (1 + 1e-12))
      fail(ErrorKind::InvalidInput, "classify_modes: Gamma_minus is not monotone");
  const auto start = static_cast<std::size_t>(std::floor(n * (1 - opt.trailing_fraction)));
  bool neutral = true, positive = true;
  for (std::size_t k = std::min(start, n - 1); k < n; ++k) {
    neutral = neutral && gp[k] + gm[k] < opt.theta * g0[k];
    positive = positive && g0[k] + gm[k] < opt.theta * gp[k];
  }
  if (neutral) return ModeDominance::NeutralDominates;
  if (positive) return ModeDominance::PositiveDominates;
  return ModeDominance::Undetermined;
}

double recursion_violation(std::span<const double> gp, std::span<const double> g0,
                           std::span<const double> gm, std::span<const double> delta, double C) {
  const std::size_t n = gp.size();
  if (g0.size() != n || gm.size() != n || delta.size() != n)
    fail(ErrorKind::InvalidInput, "recursion_violation: size mismatch");
  double worst = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double G = gp[k] + g0[k] + gm[k];
    if (G == 0) continue;
    const double e = C * std::pow(delta[k], 1.0 / 200) * G;
    const double v1 = gp[k + 1] - (std::exp(-1.0) * gp[k] + e);
    const double v2 = std::abs(g0[k + 1] - g0[k]) - e;
    const double v3 = (std::exp(1.0) * gm[k] - e) - gm[k + 1];
    worst = std::max({worst, v1 / G, v2 / G, v3 / G});
  }
  return worst;
}

RhoCheck rho_max_ode_check(const std::vector<RescaledProfile>& history,
                           std::span<const double> gamma, const CutoffPolicy& policy) {
  const std::size_t n = history.size();
  if (n < 2 || gamma.size() != n) fail(ErrorKind::InvalidInput, "rho_max_ode_check: need >= 2 snapshots");
  RhoCheck out;
  struct Pt {
    double rho, rhs;
  };
  std::vector<Pt> pts(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& g = history[k];
    const std::size_t i = argmax(g.g_values);
    const double R = policy.radius(std::max(g.delta, 0.0));
    if (std::abs(g.xi_grid[i]) >= 0.5 * R) out.argmax_near_cutoff = true;
    const auto d = differentiate(g.xi_grid, g.g_values, 5);
    const double rho = g.rho_max();
    pts[k] = {rho, 0.5 * (kSqrt2 + rho) - 1 / (kSqrt2 + rho) + d.d2[i]};
  }
  out.steps.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto& s = out.steps[k];
    s.tau = 0.5 * (history[k].tau + history[k + 1].tau);
    s.rho = 0.5 * (pts[k].rho + pts[k + 1].rho);
    s.drho_fd = (pts[k + 1].rho - pts[k].rho) / (history[k + 1].tau - history[k].tau);
    s.identity_rhs = 0.5 * (pts[k].rhs + pts[k + 1].rhs);
  }
  const std::size_t cal = std::max<std::size_t>(1, (n - 1) / 4);
  auto g4 = [&](std::size_t k) { return std::pow(0.5 * (gamma[k] + gamma[k + 1]), 0.25); };
  for (std::size_t k = 0; k < cal; ++k) {
    const auto& s = out.steps[k];
    const double den = s.rho * s.rho + g4(k);
    if (den > 0) out.C = std::max(out.C, (s.rho - s.drho_fd) / den);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto& s = out.steps[k];
    s.lower_bound = s.rho - out.C * s.rho * s.rho - out.C * g4(k);
    s.violated = k >= cal && s.drho_fd < s.lower_bound - 1e-12;
  }
  return out;
}

void write_spectral_csv(std::ostream& os, const std::vector<SpectralRecord>& rows) {
  os << "tau,alpha,gamma_plus,gamma_zero,gamma_minus,delta,rho_max\n";
  for (const auto& r : rows)
    os << format_double(r.tau) << ',' << format_double(r.alpha) << ',' << format_double(r.gamma_plus)
       << ',' << format_double(r.gamma_zero) << ',' << format_double(r.gamma_minus) << ','
       << format_double(r.delta) << ',' << format_double(r.rho_max) << '\n';
}

}  // namespace ovals
