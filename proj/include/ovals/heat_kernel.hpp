#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace ovals {

struct KernelConfig {
  double tol = 1e-14;
};

/// Number of images per sign so the omitted Gaussian tail is below tol.
int image_cutoff(double t, double tol);

/// Dirichlet heat kernel on [-1,1] by the method of images, and its derivatives.
double kernel(double x, double y, double t, const KernelConfig& cfg = {});
double kernel_dxx(double x, double y, double t, const KernelConfig& cfg = {});
double kernel_dy(double x, double y, double t, const KernelConfig& cfg = {});
double kernel_dxx_dy(double x, double y, double t, const KernelConfig& cfg = {});

enum class Boundary { Left, Right };  // y = -1, y = +1

/// d/dy K_t(x, y) at y = -1 or y = +1.
double boundary_flux(double x, double t, Boundary side, const KernelConfig& cfg = {});

struct LemmaA1Row {
  int item;          // 1..4
  double t_or_y;
  double ratio;
};

struct LemmaA1Table {
  double c[4] = {0, 0, 0, 0};
  double C = 0;  // max of the four and 1
  std::vector<LemmaA1Row> rows;
};

/// Smallest constants making the four kernel estimates hold on explicit grids.
LemmaA1Table lemma_A1_scan(std::size_t n_y = 1999, std::size_t n_t = 2000);

/// Caloric function on [-1,1] x [-1,0] given by its parabolic-boundary data.
struct CaloricData {
  std::function<double(double)> initial;  // h(y, -1)
  std::function<double(double)> left;     // h(-1, s), s in [-1, 0]
  std::function<double(double)> right;    // h(+1, s)
};

struct Representation {
  double h = 0;      // h(x, 0)
  double h_xx = 0;   // h_xx(x, 0)
  bool corner_mismatch = false;
};

Representation representation_solve(const CaloricData& data, double x, const KernelConfig& cfg = {});

/// Random nonnegative, corner-compatible boundary data (positive exponential-cosine
/// initial profile, increasing polynomial lateral data).
CaloricData random_caloric_data(std::uint64_t seed);

struct BoundCheck {
  double mu = 0, lhs = 0, rhs = 0;
  bool pass = false;
};

/// |h_xx(0,0)| <= C mu^-2 h(0,0) + C exp(-1/(8 mu)) sup over {-1,1} x [-1,0] of h.
BoundCheck second_derivative_bound_check(const CaloricData& data, double mu, double C,
                                         const KernelConfig& cfg = {});

}  // namespace ovals
