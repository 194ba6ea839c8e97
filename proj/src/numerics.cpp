#include "ovals/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "ovals/error.hpp"

namespace ovals {

std::vector<double> fd_weights(double x0, std::span<const double> x, int m) {
  const std::size_t n = x.size();
  std::vector<double> c((m + 1) * n, 0.0);
  auto at = [&](int k, std::size_t j) -> double& { return c[k * n + j]; };
  double c1 = 1.0;
  double c4 = x[0] - x0;
  at(0, 0) = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          at(k, i) = c1 * (k * at(k - 1, i - 1) - c5 * at(k, i - 1)) / c2;
        at(0, i) = -c1 * c5 * at(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) at(k, j) = (c4 * at(k, j) - k * at(k - 1, j)) / c3;
      at(0, j) = c4 * at(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

Derivatives differentiate(std::span<const double> x, std::span<const double> f, int width) {
  const std::size_t n = x.size();
  if (n < static_cast<std::size_t>(width) || width < 3 || width % 2 == 0)
    fail(ErrorKind::InvalidInput, "differentiate: grid too small for stencil");
  Derivatives d{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = width / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= half ? i - half : 0;
    lo = std::min(lo, n - width);
    auto xs = x.subspan(lo, width);
    auto w = fd_weights(x[i], xs, 2);
    double a = 0, b = 0;
    for (int j = 0; j < width; ++j) {
      a += w[width + j] * f[lo + j];
      b += w[2 * width + j] * f[lo + j];
    }
    d.d1[i] = a;
    d.d2[i] = b;
  }
  return d;
}

double d1_centered(std::span<const double> x, std::span<const double> f, std::size_t i) {
  const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
  return (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] +
         (h1 / (h2 * (h1 + h2))) * f[i + 1];
}

double d2_centered(std::span<const double> x, std::span<const double> f, std::size_t i) {
  const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
  return 2.0 * (f[i - 1] / (h1 * (h1 + h2)) - f[i] / (h1 * h2) + f[i + 1] / (h2 * (h1 + h2)));
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

std::vector<double> cumulative_trapezoid(std::span<const double> x, std::span<const double> f,
                                         std::size_t anchor) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = anchor + 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  for (std::size_t i = anchor; i-- > 0;)
    out[i] = out[i + 1] - 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
  return out;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) fail(ErrorKind::InvalidInput, "pchip: need matching arrays, n >= 2");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    if (!(h[i] > 0)) fail(ErrorKind::InvalidInput, "pchip: abscissae not strictly increasing");
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  if (n == 2) {
    m_[0] = m_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) continue;
    const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
    m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  // one-sided three-point end slopes, limited as in scipy
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0) return 0.0;
    if (d0 * d1 <= 0 && std::abs(m) > 3 * std::abs(d0)) return 3 * d0;
    return m;
  };
  m_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  m_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t Pchip::locate(double x) const { return bracket(x_, x); }

double Pchip::operator()(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
}

double Pchip::derivative(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h +
         (3 * t2 - 4 * t + 1) * m_[i] + (3 * t2 - 2 * t) * m_[i + 1];
}

std::size_t bracket(std::span<const double> x, double v) {
  auto it = std::upper_bound(x.begin(), x.end(), v);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

double interpolated_root(std::span<const double> x, std::span<const double> y, std::size_t i) {
  const std::size_t n = x.size();
  std::size_t lo = i >= 1 ? i - 1 : 0;
  if (n >= 4) lo = std::min(lo, n - 4);
  const std::size_t w = std::min<std::size_t>(4, n);
  auto xs = x.subspan(lo, w);
  auto p = [&](double v, double* dp) {
    auto c = fd_weights(v, xs, 1);
    double s = 0, ds = 0;
    for (std::size_t j = 0; j < w; ++j) {
      s += c[j] * y[lo + j];
      ds += c[w + j] * y[lo + j];
    }
    *dp = ds;
    return s;
  };
  double a = x[i], b = x[i + 1];
  double d;
  double fa = p(a, &d);
  double v = a - y[i] * (b - a) / (y[i + 1] - y[i]);
  for (int it = 0; it < 60; ++it) {
    const double fv = p(v, &d);
    if ((fv < 0) == (fa < 0)) {
      a = v;
      fa = fv;
    } else {
      b = v;
    }
    double next = d != 0 ? v - fv / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - v) <= 1e-15 * std::max(1.0, std::abs(v))) return next;
    v = next;
  }
  return v;
}

double smoothstep5(double u) {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

QuadratureRule gauss_hermite(int n) {
  // Newton iteration on orthonormal Hermite functions with asymptotic starting guesses.
  QuadratureRule q{std::vector<double>(n), std::vector<double>(n)};
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0, pp = 0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * q.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * q.nodes[1];
    else
      z = 2.0 * z - q.nodes[i - 2];
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    q.nodes[i] = z;
    q.nodes[n - 1 - i] = -z;
    q.weights[i] = q.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  std::reverse(q.nodes.begin(), q.nodes.end());
  std::reverse(q.weights.begin(), q.weights.end());
  return q;
}

double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double h0 = 1.0, h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) v.back() = b;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace ovals
