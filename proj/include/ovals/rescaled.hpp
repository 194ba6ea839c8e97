#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ovals/numerics.hpp"
#include "ovals/profile.hpp"

namespace ovals {

/// G(xi, tau) = e^{tau/2} F(e^{-tau/2} xi, t) - sqrt(2), tau = -log(-t).
struct RescaledProfile {
  std::vector<double> xi_grid;
  std::vector<double> g_values;
  double tau = 0;
  double delta = 0;
  EndKind left = EndKind::Tip, right = EndKind::Tip;

  /// G at any xi. Past a tip the radius is zero (G = -sqrt 2); past an open end
  /// the end value is continued.
  double value(double xi) const;
  double rho_max() const;
  double g_at_origin() const;

  Pchip interp;
};

RescaledProfile make_rescaled(std::vector<double> xi, std::vector<double> g, double tau,
                              EndKind left = EndKind::Tip, EndKind right = EndKind::Tip);

/// Snapshot on the profile's own nodes, xi_i = z_i / sqrt(-t).
RescaledProfile to_rescaled(const Profile& p, double t);
/// Snapshot resampled onto `xi_grid` by monotone cubic interpolation.
RescaledProfile to_rescaled(const Profile& p, double t, std::span<const double> xi_grid);

/// |G(0)| + rho_max for one snapshot.
double snapshot_delta(const RescaledProfile& g);

/// Running sup of snapshot_delta along a trajectory.
class DeltaTracker {
 public:
  double update(const RescaledProfile& g);
  double value() const { return sup_; }

 private:
  double sup_ = 0;
  bool seen_ = false;
};

/// chi(s): 1 on |s| <= 1/2, 0 on |s| >= 1, quintic smoothstep in between.
double chi(double s);

/// Cutoff radius xi_cut = max(delta^{-exponent}, floor). floor = 0 is the literal rule.
struct CutoffPolicy {
  double exponent = 0.01;
  double floor = 0;
  double radius(double delta) const;
};

/// G(xi) chi(xi / xi_cut) on the profile grid.
std::vector<double> cutoff(const RescaledProfile& g, const CutoffPolicy& policy = {});

struct SpectralOptions {
  int n_modes = 12;   // Hermite cut N
  int n_nodes = 64;   // Gauss-Hermite nodes after xi = 2x
};

struct SpectralReport {
  std::vector<double> coeffs;
  double gamma_plus = 0, gamma_zero = 0, gamma_minus = 0, gamma_total = 0;
  double alpha = 0;
};

/// Integral of e^{-xi^2/4} f(xi) over the line by Gauss-Hermite.
double gaussian_integral(const std::function<double(double)>& f, int n_nodes = 64);

/// Squared weighted norm of h_n(xi) = H_n(xi/2).
double hermite_norm2(int n);

SpectralReport project(const std::function<double(double)>& g_hat, const SpectralOptions& opt = {});
SpectralReport project(const RescaledProfile& g, const CutoffPolicy& policy,
                       const SpectralOptions& opt = {});

/// G_xixi - xi/2 G_xi + G with `width`-point stencils.
std::vector<double> apply_L(std::span<const double> xi, std::span<const double> g, int width = 3);

/// Weighted L2 norm squared of (G_next - G_prev)/dtau - L G_mid over |xi| <= xi_cut.
/// Both snapshots must share the xi grid.
double linearization_residual(const RescaledProfile& prev, const RescaledProfile& next, double dtau,
                              const CutoffPolicy& policy = {});

/// Nonlinear part of the rescaled equation, E = G_tau - L G, evaluated from one
/// snapshot. The profile form handles tips; the grid form needs G > -sqrt 2.
std::vector<double> nonlinear_source(const Profile& p, double t);
std::vector<double> nonlinear_source(const RescaledProfile& g, int width = 5);

struct NeutralProjection {
  double value = 0;      // integral over |xi| <= xi_cut of e^{-xi^2/4} E (xi^2 - 2)
  double predicted = 0;  // -128 sqrt(2 pi) alpha^2
  double alpha = 0;
};
NeutralProjection neutral_source_projection(const RescaledProfile& g, std::span<const double> E,
                                            const CutoffPolicy& policy = {},
                                            const SpectralOptions& opt = {});

struct AlphaFit {
  double kappa = 0;          // alpha' = kappa alpha^2
  double sup_deviation = 0;  // sup |8 tau alpha - 1|
};
/// Least squares on 1/alpha, whose slope is -kappa.
AlphaFit alpha_ode_fit(std::span<const double> tau, std::span<const double> alpha);

enum class ModeDominance { PositiveDominates, NeutralDominates, Undetermined };
std::string to_string(ModeDominance m);

struct ClassifierOptions {
  double theta = 0.2;
  double trailing_fraction = 0.5;
};

/// Sequences are indexed by backward steps: entry k belongs to tau_bar_0 - k, so the
/// trailing entries are the far past.
ModeDominance classify_modes(std::span<const double> gamma_plus, std::span<const double> gamma_zero,
                             std::span<const double> gamma_minus, const ClassifierOptions& opt = {});

/// Largest violation of the three one-step recursive inequalities with constant C
/// (0 when all hold). Same indexing as classify_modes; delta[k] is delta(tau_bar_k).
double recursion_violation(std::span<const double> gamma_plus, std::span<const double> gamma_zero,
                           std::span<const double> gamma_minus, std::span<const double> delta,
                           double C);

struct RhoStep {
  double tau = 0;
  double rho = 0;
  double drho_fd = 0;       // finite-difference d rho_max / d tau
  double identity_rhs = 0;  // (sqrt2+rho)/2 - 1/(sqrt2+rho) + G_xixi(xi_*)
  double lower_bound = 0;   // rho - C rho^2 - C gamma^{1/4}
  bool violated = false;
};
struct RhoCheck {
  std::vector<RhoStep> steps;
  double C = 0;
  bool argmax_near_cutoff = false;
};
/// `gamma` holds gamma_total per snapshot. C is calibrated on the first quarter.
RhoCheck rho_max_ode_check(const std::vector<RescaledProfile>& history,
                           std::span<const double> gamma, const CutoffPolicy& policy = {});

struct SpectralRecord {
  double tau, alpha, gamma_plus, gamma_zero, gamma_minus, delta, rho_max;
};
void write_spectral_csv(std::ostream& os, const std::vector<SpectralRecord>& rows);

}  // namespace ovals
