#include "ovals/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

namespace {
constexpr double kBlendPower = 40;
}

Profile cylinder_profile(double t, double half_width, std::size_t n) {
  if (!(t < 0) || !(half_width > 0) || n < 5 || n % 2 == 0)
    fail(ErrorKind::InvalidInput, "cylinder_profile: need t < 0, width > 0 and odd n >= 5");
  auto z = linspace(-half_width, half_width, n);
  z[n / 2] = 0;
  return Profile(z, std::vector<double>(n, std::sqrt(-2 * t)));
}

Profile sphere_profile(double r, std::size_t n) {
  if (!(r > 0) || n < 5 || n % 2 == 0)
    fail(ErrorKind::InvalidInput, "sphere_profile: need r > 0 and odd n >= 5");
  const double a = 0.5 * std::numbers::pi * r;
  auto z = linspace(-a, a, n);
  z[n / 2] = 0;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = r * std::cos(z[i] / r);
  f.front() = f.back() = 0;
  return Profile(z, f);
}

OvalParameters oval_parameters(double t) {
  if (!(t < -1)) fail(ErrorKind::Domain, "oval: need t < -1");
  OvalParameters p;
  p.L = std::log(-t);
  p.D = std::sqrt(-t * (4 * p.L + 2));
  p.lambda = 2 * p.L / p.D;
  p.s_match = std::sqrt(2 * p.L) / p.lambda;
  return p;
}

double oval_value(const BryantSolution& sol, double t, double z) {
  const auto p = oval_parameters(t);
  const double s = p.D - std::abs(z);
  if (s < 0) fail(ErrorKind::Domain, "oval: z beyond the tips");
  const double bulk = std::sqrt(std::max(0.0, (p.D * p.D - z * z) / (2 * p.L)));
  // the stored soliton has tip curvature -6 b0; mu maps it to unit curvature
  const double mu = std::sqrt(-6 * sol.b0) * p.lambda;
  const double cap = sol.B(mu * s) / mu;
  // power-mean soft minimum: concave and nondecreasing in both pieces, so the
  // result stays concave
  const double lo = std::min(cap, bulk), hi = std::max(cap, bulk);
  if (lo <= 0) return 0.0;
  return lo * std::pow(1 + std::pow(lo / hi, kBlendPower), -1 / kBlendPower);
}

Profile oval_ansatz(const BryantSolution& sol, double t, const OvalOptions& opt) {
  const auto p = oval_parameters(t);
  const double h0 = opt.h_tip / p.lambda;
  const double h1 = opt.h_bulk * std::sqrt(-t);
  if (!(h0 > 0) || !(h1 >= h0) || !(opt.growth >= 0))
    fail(ErrorKind::InvalidInput, "oval_ansatz: bad mesh options");
  // tip distances for one half, stretched so the last lands on q
  std::vector<double> s{0.0};
  while (s.back() < p.D) s.push_back(s.back() + std::min(h1, h0 + opt.growth * s.back()));
  if (p.D - s[s.size() - 2] < 0.5 * (s.back() - s[s.size() - 2])) s.pop_back();
  const double scale = p.D / s.back();
  for (double& v : s) v *= scale;
  const std::size_t m = s.size();
  std::vector<double> z(2 * m - 1), f(2 * m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    z[k] = -p.D + s[k];
    z[2 * m - 2 - k] = p.D - s[k];
  }
  z[m - 1] = 0;
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = oval_value(sol, t, z[i]);
  f.front() = f.back() = 0;
  return Profile(z, f);
}

}  // namespace ovals
