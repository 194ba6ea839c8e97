#pragma once

#include <vector>

#include "ovals/profile.hpp"

namespace ovals {

/// Rotationally symmetric steady soliton, stored both as Phi(r) = B'(z)^2 on a
/// log-spaced radius grid and as the warp function B(z).
struct BryantSolution {
  double b0 = 0;  // Phi = 1 + b0 r^2 + ...
  double c0 = 0;  // Phi ~ c0 r^-2 + 2 c0^2 r^-4
  double r_start = 0;
  std::vector<double> r_grid, phi_values, dphi_values, z_of_r;
  std::vector<double> one_minus_phi;  // kept separately for precision near the tip

  /// Tail refinement: two-parameter fit r^2 Phi = c0' + d r^-2 over the last decade.
  double tail_c0_two_param = 0;
  double tail_d = 0;

  double k_orb(std::size_t i) const;
  double k_rad(std::size_t i) const;
  double scalar_curvature(std::size_t i) const;
  /// Scalar curvature at the tip, extrapolated from the first two samples.
  double tip_scalar_curvature() const;

  /// Warp function and its slope at arclength z >= 0 from the tip.
  double B(double z) const;
  double dB(double z) const;
};

struct BryantOptions {
  double r_start = 1e-3;
  double rel_tol = 1e-10;
  std::size_t n_store = 2000;
};

BryantSolution solve_phi(double b0, double r_end = 1e3, const BryantOptions& opt = {});

/// Sup-norm residual of the Phi ODE on the stored grid (Phi'' by differences in log r).
double phi_ode_residual(const BryantSolution& sol);

/// Integral of the radial Ricci curvature 2 K_rad along the ray from the tip.
double ray_ricci_integral(const BryantSolution& sol);

/// Cap F(s) = B(lambda s)/lambda with lambda = sqrt(R_tip) for s in [0, s_max],
/// the tip at z = 0 and an open outer end.
Profile bryant_cap_profile(const BryantSolution& sol, double R_tip, std::size_t n_points,
                           double s_max);

/// Coefficients p_k of the even series Phi = sum p_k r^{2k}, k = 0..order.
std::vector<double> phi_series(double b0, int order);

}  // namespace ovals
