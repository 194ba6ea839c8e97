#pragma once

#include <vector>

#include "ovals/bryant.hpp"
#include "ovals/flow.hpp"
#include "ovals/profile.hpp"

namespace ovals {

struct ParabolicFit {
  double coefficient = 0;    // least squares of F^2 + 2t against -(z^2 + 2t)/(2 log(-t))
  double residual = 0;       // sup |F^2 + 2t - c model| in units of (-t)/log(-t)
  double unit_residual = 0;  // same with c = 1
  std::size_t n_points = 0;
};
/// Region |z| <= L sqrt(-t). Needs log(-t) >= 5 and at least 50 nodes in the region.
ParabolicFit parabolic_fit(const Profile& p, double t, double L = 3);

struct IntermediateFit {
  double deviation = 0;  // sup |F^2 + 2t + z^2/(2 log(-t))|/(-t) on the region
  double predicted = 0;  // 2 sqrt(1 - theta^2) sqrt((-t) log(-t))
  double z_left = 0, z_right = 0;  // distances from q to the level set F = theta sqrt(-2t)
  double ratio_left = 0, ratio_right = 0;
};
/// Region |z| <= predicted. Throws Region when the level set is not crossed on a side.
IntermediateFit intermediate_fit(const Profile& p, double t, double theta = 0.3);

struct TipSide {
  bool resolved = false;
  double distance_ratio = 0;   // d_tip / (2 sqrt((-t) log(-t)))
  double curvature_ratio = 0;  // R_tip (-t) / log(-t)
  double velocity_ratio = 0;   // -d(d_tip)/dt / sqrt(R_tip); NaN with fewer than 3 records
  double bryant_closeness = 0; // sup sqrt(R) |F(s) - B(sqrt(R) s)/sqrt(R)| over sqrt(R) s <= window
};
struct TipReport {
  bool applicable = true;      // false for sphere-like data (r_max/sqrt(-2t) near sqrt 2)
  double neck_ratio = 0;       // r_max / sqrt(-2t)
  TipSide left, right;
};
TipReport tip_report(const FlowState& s, const BryantSolution& sol, double window = 2);

struct StarCheck {
  bool pass = false;
  double sup = 0;         // sup of (r_max/sqrt(-2t) - 1)(-t)^alpha
  double t_at_sup = 0;
  double growth = 0;      // least-squares slope of log of the scaled excess against log(-t)
  double diameter_ratio = 0;  // (d_left + d_right)/(-t)^(1/(2(1 - alpha))) at the latest record
};
/// Passes when the scaled excess is at most `bound` and does not grow toward the past.
/// Needs records spanning at least a decade of -t.
StarCheck check_star(const std::vector<FlowRecord>& history, double alpha, double bound = 10);

/// max F_z^2 (-t)^(alpha/(1-alpha)) where F >= sqrt(-t). Throws Inapplicable unless
/// check_star passes on the snapshots' own r_max record.
double star_gradient_bound(const std::vector<Snapshot>& snapshots, double alpha, double bound = 10);

/// min{(1 + alpha^2/200) alpha, 1}.
double bootstrap_map(double alpha);
/// Iterates from alpha0 until 1 is reached or max_steps; includes alpha0.
std::vector<double> bootstrap_iterates(double alpha0, std::size_t max_steps = 100000);

enum class AnsatzPiece { Oval, Cylinder };
struct AnsatzResidual {
  double parabolic = 0;     // sup over |z| <= L sqrt(-t), units 1/(sqrt(-t) log(-t))
  double intermediate = 0;  // sup over |z| <= 2 sqrt(1-theta^2) sqrt((-t) log(-t)), units 1/sqrt(-t)
};
/// rhs of the flow on the ansatz at t against its time derivative at fixed z
/// (fourth-order differences in t). Needs t <= -e^8.
AnsatzResidual ansatz_residual(const BryantSolution& sol, double t, AnsatzPiece piece = AnsatzPiece::Oval,
                               double L = 3, double theta = 0.3);

}  // namespace ovals
