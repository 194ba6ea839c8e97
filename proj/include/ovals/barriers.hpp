#pragma once

#include <iosfwd>
#include <vector>

#include "ovals/flow.hpp"
#include "ovals/numerics.hpp"
#include "ovals/profile.hpp"

namespace ovals {

/// psi_a on [r_star/a, 1 + a^-2/100], sampled on a grid graded toward both ends.
struct BarrierFunction {
  BarrierFunction() = default;
  BarrierFunction(double a, double r_star, std::vector<double> s, std::vector<double> psi);

  double a = 0;
  double r_star = 1;
  double eps = 0;    // strictness: the ODE solved is N[psi] = -eps (psi + a^-2)^2 / s^2
  double slope = 0;  // psi'(r_star/a) = -slope * a
  std::vector<double> s_grid, psi_values;

  double s_min() const { return s_grid.front(); }
  double s_max() const { return s_grid.back(); }
  double operator()(double s) const;

 private:
  Pchip interp_;
};

struct BarrierOptions {
  double r_star = 1;
  double psi_start = 2;          // psi(r_star/a)
  double tail_target = 1.15;     // a^2 psi / (s^-2 - 1) at s = 0.9
  std::vector<double> eps_grid{0.1, 0.05, 0.2};
  std::size_t n_grid = 4001;
  double theta = 0.1;            // window [1 - theta, s_max] of the outer lower bound
  double C = 500;                // psi <= C a^-2 on [1/10, s_max]
};

/// N[psi] = psi psi'' - psi'^2/2 + s^-2 (1 - psi)(s psi' + 2 psi) - s psi'.
double barrier_operator(double s, double psi, double dpsi, double d2psi);

/// Shoots N[psi] = -eps (psi + a^-2)^2/s^2 from psi(r_star/a) = psi_start, bisecting
/// the initial slope until the tail coefficient hits the target; tries each eps in
/// turn and throws ConstructionFailed if none passes verification.
BarrierFunction build_barrier(double a, const BarrierOptions& opt = {});

/// N[psi] at every interior grid node by centered differences.
std::vector<double> barrier_residual(std::span<const double> s, std::span<const double> psi);
/// Largest N[psi] over the interior nodes; the barrier is strict iff this is < 0.
double verify_supersolution(std::span<const double> s, std::span<const double> psi);
double verify_supersolution(const BarrierFunction& b);

struct BarrierProperties {
  double max_N = 0;              // < 0
  double plateau_C = 0;          // max a^2 psi on [1/10, s_max], <= C
  double min_psi_a4 = 0;         // min a^4 psi, >= 1/32
  double psi_inner = 0;          // psi(r_star/a), >= 3/2
  double outer_margin_a4 = 0;    // min a^4 (psi - a^-2 (s^-2 - 1)) - 1/16 on the window, >= 0
  bool supersolution = false, upper = false, floor = false, inner = false, outer = false;
  bool ok() const { return supersolution && upper && floor && inner && outer; }
};
BarrierProperties verify_properties(const BarrierFunction& b, const BarrierOptions& opt = {});

enum class OrderingStatus { Pass, Violation };

struct OrderingReport {
  OrderingStatus status = OrderingStatus::Pass;
  std::vector<double> t, worst_ratio;  // per snapshot: max F_z^2 / psi over the region
  // first violation
  double t_violation = 0, z_violation = 0, lhs = 0, rhs = 0;
};

/// F_z^2 < psi_a(F/w) wherever F >= r_star a^-1 w, with w = sqrt(-2t + time_shift).
/// Throws Inapplicable when r_max/w exceeds 1 + a^-2/100 at some snapshot.
OrderingReport check_ordering(const std::vector<Snapshot>& history, const BarrierFunction& b,
                              double time_shift = 0);

struct GradientBoundReport {
  bool precondition = false;         // log(-t) > M^2
  std::vector<double> z, ratio;      // LHS/RHS on the region
  double pass_fraction = 1;          // share of region nodes with ratio <= 1
};

/// F_z^2 against (M^2 + C)/(M^2 - 2) (-2t/F^2 - 1)/(2 log(-t)) on |z| >= M sqrt(-t),
/// F >= theta sqrt(-2t). C defaults to 2/theta^2 when negative.
GradientBoundReport intermediate_gradient_bound(const Profile& p, double t, double theta, double M,
                                                double C = -1);

/// Columns s, psi, N_of_psi (N is blank at the two end nodes).
void write_barrier_csv(std::ostream& os, const BarrierFunction& b);

}  // namespace ovals
