#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ovals/profile.hpp"

namespace ovals {

struct StepControl {
  double dt_max = 1.0;
  double cfl_safety = 0.5;
  /// Remesh onto the reference mesh once some cell has shrunk or grown by more than
  /// this fraction relative to it (0 = never).
  double regrid_threshold = 0.0;
  /// Nodes at each end that get five-point stencils.
  std::size_t band = 32;
};

struct FlowRecord {
  double t, r_max, d_tip_left, d_tip_right, R_tip_left, R_tip_right;  // NaN when not a resolved tip
};

struct FlowWarning {
  double t;
  std::string what;
};

struct FlowState {
  Profile profile;
  double t = 0;
  std::vector<FlowRecord> history;
  std::vector<FlowWarning> warnings;
  std::size_t steps = 0;
  std::size_t regrids = 0;
  /// Node positions of the initial mesh as fractions z/|z_end| of each half.
  std::vector<double> reference_mesh;
};

FlowState make_state(Profile p, double t);

/// A stored profile of a trajectory.
struct Snapshot {
  double t;
  Profile profile;
};

enum class RhsForm { Raw, Integrated };

/// F_t at fixed z. The raw form uses the nonlocal integral of F_zz/F, the integrated
/// form the boundary term at q and the integral of F_z^2/F^2 (interior nodes only).
std::vector<double> rhs(const Profile& p, RhsForm form = RhsForm::Raw);

/// Velocity 2 int_0^z F_zz/F of the material point currently at z.
double material_velocity(const Profile& p, double z);

/// One explicit RK4 step of the material-point system z' = v, r' = F_zz - (1 - F_z^2)/F.
/// `t_stop` caps the step so a run can end exactly on a target time.
FlowState step(const FlowState& s, const StepControl& ctl, double t_stop = 0.0);
/// In-place form of step(); returns the dt taken.
double advance(FlowState& s, const StepControl& ctl, double t_stop = 0.0);

/// Steps until t_end. `observer` runs after every accepted step.
void evolve(FlowState& s, double t_end, const StepControl& ctl,
            const std::function<void(const FlowState&)>& observer = {});

/// z/|z_end| per node, with the left half negative.
std::vector<double> mesh_fractions(const Profile& p);
/// Largest |log| ratio of a cell to its counterpart on the reference mesh scaled to p's ends.
double mesh_drift(const Profile& p, const std::vector<double>& fractions);
/// Monotone cubic interpolation of p onto the reference mesh scaled to p's ends.
Profile regrid(const Profile& p, const std::vector<double>& fractions);

struct RmaxCheck {
  std::vector<double> t, value;  // value = -1/2 d(r_max^2)/dt
  bool flagged = false;
};
RmaxCheck rmax_derivative_check(const std::vector<FlowRecord>& history, double tol = 1e-3);

void write_trajectory_csv(std::ostream& os, const std::vector<FlowRecord>& history);

}  // namespace ovals
