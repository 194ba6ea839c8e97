#pragma once

#include <cstddef>

#include "ovals/bryant.hpp"
#include "ovals/profile.hpp"

namespace ovals {

/// Exact cylinder F = sqrt(-2t) on [-half_width, half_width] with open ends (n odd).
Profile cylinder_profile(double t, double half_width, std::size_t n);

/// Round sphere of radius r with q on the equator: F = r cos(z/r), n odd.
Profile sphere_profile(double r, std::size_t n);

/// Scales of the composite oval at time t, with L = log(-t):
/// bulk F^2 = ((-t)(4L+2) - z^2)/(2L) vanishing at |z| = D, Bryant caps scaled by
/// lambda = 2L/D so that both pieces behave like sqrt(D s / L) at tip distance s.
/// The two are joined by a soft minimum; s_match = sqrt(2L)/lambda is the
/// geometric middle of the overlap.
struct OvalParameters {
  double L, D, lambda, s_match;
};
OvalParameters oval_parameters(double t);

struct OvalOptions {
  double h_tip = 0.04;   // spacing at the tips in units of 1/lambda
  double h_bulk = 0.02;  // bulk spacing in units of sqrt(-t)
  double growth = 0.05;  // spacing increase per unit tip distance
};

/// F of the composite ansatz at signed position z (|z| <= D).
double oval_value(const BryantSolution& sol, double t, double z);

Profile oval_ansatz(const BryantSolution& sol, double t, const OvalOptions& opt = {});

}  // namespace ovals
