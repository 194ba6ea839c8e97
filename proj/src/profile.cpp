#include "ovals/profile.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ovals/error.hpp"
#include "ovals/numerics.hpp"

namespace ovals {

Profile::Profile(std::vector<double> z, std::vector<double> f) : z_(std::move(z)), f_(std::move(f)) {
  const std::size_t n = z_.size();
  if (n < 5 || f_.size() != n) fail(ErrorKind::InvalidInput, "profile: need >= 5 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(z_[i] > z_[i - 1])) fail(ErrorKind::InvalidInput, "profile: z grid not strictly increasing");
  for (double v : f_)
    if (!(v >= 0) || !std::isfinite(v)) fail(ErrorKind::InvalidInput, "profile: F must be finite and >= 0");
  if (z_.front() > 0 || z_.back() < 0) fail(ErrorKind::InvalidInput, "profile: grid must contain z = 0");
  auto it = std::find(z_.begin(), z_.end(), 0.0);
  if (it == z_.end()) fail(ErrorKind::InvalidInput, "profile: reference point z = 0 must be a node");
  origin_ = static_cast<std::size_t>(it - z_.begin());
  left_ = f_.front() == 0.0 ? EndKind::Tip : EndKind::Open;
  right_ = f_.back() == 0.0 ? EndKind::Tip : EndKind::Open;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!(f_[i] > 0)) fail(ErrorKind::InvalidInput, "profile: F must be positive away from the ends");
}

double Profile::r_max() const { return *std::max_element(f_.begin(), f_.end()); }

Profile::InvariantReport Profile::check_invariants(const InvariantTolerances& tol) const {
  InvariantReport rep;
  const std::size_t n = z_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double s = std::abs((f_[i + 1] - f_[i]) / (z_[i + 1] - z_[i]));
    rep.slope_excess = std::max(rep.slope_excess, s - (1.0 + tol.slope));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = z_[i] - z_[i - 1], h2 = z_[i + 1] - z_[i];
    const double dd = (f_[i + 1] - f_[i]) / h2 - (f_[i] - f_[i - 1]) / h1;
    rep.concavity_excess = std::max(rep.concavity_excess, dd - tol.concavity);
  }
  return rep;
}

double Profile::value_at(double z) const {
  if (z < z_.front() || z > z_.back()) fail(ErrorKind::Domain, "profile: evaluation outside the domain");
  const std::size_t i = bracket(z_, z);
  // local monotone cubic on a small window keeps this O(1)
  const std::size_t lo = i >= 2 ? i - 2 : 0;
  const std::size_t hi = std::min(z_.size(), i + 4);
  Pchip p(std::vector<double>(z_.begin() + lo, z_.begin() + hi),
          std::vector<double>(f_.begin() + lo, f_.begin() + hi));
  return p(z);
}

void profile_derivatives(const std::vector<double>& z, const std::vector<double>& f, EndKind left,
                         EndKind right, std::vector<double>& fz, std::vector<double>& fzz,
                         std::size_t band) {
  const std::size_t n = z.size();
  fz.resize(n);
  fzz.resize(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = z[i] - z[i - 1], h2 = z[i + 1] - z[i];
    const double a = 1.0 / (h1 * (h1 + h2)), c = 1.0 / (h2 * (h1 + h2));
    fz[i] = -h2 * a * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] + h1 * c * f[i + 1];
    fzz[i] = 2.0 * (a * f[i - 1] - f[i] / (h1 * h2) + c * f[i + 1]);
  }
  // extended grid: two reflected ghosts per end, odd about tips and even about open ends
  double xe[4], ye[4];
  const double sl = left == EndKind::Tip ? -1.0 : 1.0;
  const double sr = right == EndKind::Tip ? -1.0 : 1.0;
  xe[0] = 2 * z[0] - z[2];
  ye[0] = sl * f[2];
  xe[1] = 2 * z[0] - z[1];
  ye[1] = sl * f[1];
  xe[2] = 2 * z[n - 1] - z[n - 2];
  ye[2] = sr * f[n - 2];
  xe[3] = 2 * z[n - 1] - z[n - 3];
  ye[3] = sr * f[n - 3];
  auto ext = [&](long k, double& x, double& y) {
    if (k < 0) {
      x = xe[k + 2];
      y = ye[k + 2];
    } else if (k >= static_cast<long>(n)) {
      x = xe[2 + (k - static_cast<long>(n))];
      y = ye[2 + (k - static_cast<long>(n))];
    } else {
      x = z[k];
      y = f[k];
    }
  };
  auto five = [&](std::size_t i) {
    double xs[5], ys[5];
    for (int k = 0; k < 5; ++k) ext(static_cast<long>(i) + k - 2, xs[k], ys[k]);
    auto w = fd_weights(z[i], std::span<const double>(xs, 5), 2);
    double d1 = 0, d2 = 0;
    for (int k = 0; k < 5; ++k) {
      d1 += w[5 + k] * ys[k];
      d2 += w[10 + k] * ys[k];
    }
    fz[i] = d1;
    fzz[i] = d2;
  };
  const std::size_t b = std::min(band, n);
  for (std::size_t i = 0; i < b; ++i) five(i);
  for (std::size_t i = std::max(b, n - b); i < n; ++i) five(i);
  if (b == 0) {
    five(0);
    five(n - 1);
  }
  if (left == EndKind::Open) fz[0] = 0;
  if (right == EndKind::Open) fz[n - 1] = 0;
  if (left == EndKind::Tip) fzz[0] = 0;
  if (right == EndKind::Tip) fzz[n - 1] = 0;
}

double even_extrapolate_to_tip(const std::vector<double>& z, const std::vector<double>& g, Side side) {
  const std::size_t n = z.size();
  const std::size_t t = side == Side::Left ? 0 : n - 1;
  const std::size_t a = side == Side::Left ? 1 : n - 2;
  const std::size_t b = side == Side::Left ? 2 : n - 3;
  const double s1 = (z[a] - z[t]) * (z[a] - z[t]);
  const double s2 = (z[b] - z[t]) * (z[b] - z[t]);
  return (s2 * g[a] - s1 * g[b]) / (s2 - s1);
}

CurvatureField curvatures(const Profile& p) {
  const auto& z = p.z();
  const auto& f = p.f();
  const std::size_t n = z.size();
  std::vector<double> fz, fzz;
  profile_derivatives(z, f, p.end(Side::Left), p.end(Side::Right), fz, fzz);
  CurvatureField c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] > 0) {
      c.k_orb[i] = (1 - fz[i] * fz[i]) / (f[i] * f[i]);
      c.k_rad[i] = -fzz[i] / f[i];
    }
  }
  for (Side s : {Side::Left, Side::Right}) {
    if (p.end(s) != EndKind::Tip) continue;
    const std::size_t t = s == Side::Left ? 0 : n - 1;
    c.k_orb[t] = even_extrapolate_to_tip(z, c.k_orb, s);
    c.k_rad[t] = even_extrapolate_to_tip(z, c.k_rad, s);
  }
  for (std::size_t i = 0; i < n; ++i) c.R[i] = 2 * c.k_orb[i] + 4 * c.k_rad[i];
  return c;
}

double tip_scalar_curvature(const Profile& p, Side side) {
  if (p.end(side) != EndKind::Tip) fail(ErrorKind::InvalidInput, "tip_scalar_curvature: end is not a tip");
  const auto& z = p.z();
  const auto& f = p.f();
  const std::size_t n = z.size();
  // a cap fragment has its tip at q; fall back to the full length there
  double half = side == Side::Left ? p.d_tip_left() : p.d_tip_right();
  if (half <= 0) half = z.back() - z.front();
  const double zt = side == Side::Left ? z.front() : z.back();
  double sxx = 0, sxy = 0, syy = 0, bx = 0, by = 0;
  std::vector<double> ss, fs;
  for (std::size_t k = 1; k <= 16 && k < n; ++k) {
    const std::size_t i = side == Side::Left ? k : n - 1 - k;
    const double s = std::abs(z[i] - zt);
    if (s > 0.05 * half) break;
    ss.push_back(s);
    fs.push_back(f[i]);
  }
  if (ss.size() < 8) fail(ErrorKind::TipNotResolved, "tip not resolved: fewer than 8 points in the fit window");
  // least squares for F = b s + a s^3
  for (std::size_t k = 0; k < ss.size(); ++k) {
    const double s = ss[k], s3 = s * s * s;
    sxx += s * s;
    sxy += s * s3;
    syy += s3 * s3;
    bx += s * fs[k];
    by += s3 * fs[k];
  }
  const double det = sxx * syy - sxy * sxy;
  const double b = (bx * syy - by * sxy) / det;
  const double a = (sxx * by - sxy * bx) / det;
  double res = 0;
  for (std::size_t k = 0; k < ss.size(); ++k) {
    const double e = fs[k] - b * ss[k] - a * ss[k] * ss[k] * ss[k];
    res += e * e;
  }
  res = std::sqrt(res / static_cast<double>(ss.size()));
  const double sw = ss.back();
  if (std::abs(b - 1) > 0.05 || res > 0.05 * std::abs(a) * sw * sw * sw + 1e-12 * sw) {
    std::ostringstream os;
    os << "tip not resolved: slope " << b << ", fit residual " << res;
    fail(ErrorKind::TipNotResolved, os.str());
  }
  return -36.0 * a / b;
}

double neck_quality(const Profile& p, double z0, double window) {
  const auto& z = p.z();
  if (!(window > 0) || z0 - window < z.front() || z0 + window > z.back())
    fail(ErrorKind::Domain, "neck_quality: window exits the domain");
  const double f0 = p.value_at(z0);
  if (!(f0 > 0)) fail(ErrorKind::Domain, "neck_quality: F(z0) must be positive");
  std::vector<double> fz, fzz;
  profile_derivatives(z, p.f(), p.end(Side::Left), p.end(Side::Right), fz, fzz);
  double eps = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::abs(z[i] - z0) > window) continue;
    eps = std::max(eps, std::abs(p.f()[i] / f0 - 1) + std::abs(fz[i]) + f0 * std::abs(fzz[i]));
  }
  return eps;
}

void write_profile_csv(std::ostream& os, const Profile& p) {
  os << "z,f\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    os << format_double(p.z()[i]) << ',' << format_double(p.f()[i]) << '\n';
}

Profile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "z,f") fail(ErrorKind::InvalidInput, "profile csv: expected header z,f");
  std::vector<double> z, f;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorKind::InvalidInput, "profile csv: malformed row");
    try {
      z.push_back(std::stod(line.substr(0, comma)));
      f.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, "profile csv: non-numeric field");
    }
  }
  Profile p(std::move(z), std::move(f));
  if (!p.check_invariants().ok()) fail(ErrorKind::InvalidInput, "profile csv: slope/concavity invariants violated");
  return p;
}

}  // namespace ovals
