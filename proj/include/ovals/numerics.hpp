#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ovals {

/// Finite-difference weights (Fornberg) for derivatives 0..m at x0 from the nodes x.
/// Result is laid out as w[k * x.size() + j] for derivative k, node j.
std::vector<double> fd_weights(double x0, std::span<const double> x, int m);

/// First and second derivative at every node of a non-uniform grid.
/// `width` is the stencil size (3, 5 or 7); windows are shifted at the ends.
struct Derivatives {
  std::vector<double> d1;
  std::vector<double> d2;
};
Derivatives differentiate(std::span<const double> x, std::span<const double> f, int width = 3);

/// Three-point stencils at an interior node i (non-uniform spacing).
double d1_centered(std::span<const double> x, std::span<const double> f, std::size_t i);
double d2_centered(std::span<const double> x, std::span<const double> f, std::size_t i);

double trapezoid(std::span<const double> x, std::span<const double> f);

/// out[i] = integral of f from x[anchor] to x[i] (signed).
std::vector<double> cumulative_trapezoid(std::span<const double> x, std::span<const double> f,
                                         std::size_t anchor = 0);

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  double derivative(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::size_t locate(double x) const;
  std::vector<double> x_, y_, m_;
};

/// Index i such that x[i] <= v <= x[i+1]; clamps to the first/last cell.
std::size_t bracket(std::span<const double> x, double v);

/// Root of the cubic Lagrange interpolant of (x,y) near the sign change in cell [i, i+1].
double interpolated_root(std::span<const double> x, std::span<const double> y, std::size_t i);

/// Quintic smoothstep 10u^3 - 15u^4 + 6u^5 clamped to [0,1].
double smoothstep5(double u);

/// Gauss-Hermite rule for weight exp(-x^2).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite(int n);

/// Physicists' Hermite polynomial H_n(x) by recurrence.
double hermite(int n, double x);

std::vector<double> linspace(double a, double b, std::size_t n);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace ovals
