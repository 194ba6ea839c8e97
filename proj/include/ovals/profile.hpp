#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ovals {

enum class Side { Left, Right };

/// How an end of the profile closes up: a smooth tip (F = 0) or an open
/// reflection end (F_z = 0, used for cylinder windows).
enum class EndKind { Tip, Open };

struct InvariantTolerances {
  double slope = 1e-6;
  double concavity = 1e-8;
};

/// Radius F sampled on a signed arclength grid; the reference point q sits at z = 0.
class Profile {
 public:
  Profile() = default;
  /// Builds and validates. End kinds are inferred from f at the endpoints.
  Profile(std::vector<double> z, std::vector<double> f);

  const std::vector<double>& z() const { return z_; }
  const std::vector<double>& f() const { return f_; }
  std::size_t size() const { return z_.size(); }
  EndKind end(Side s) const { return s == Side::Left ? left_ : right_; }
  double d_tip_left() const { return -z_.front(); }
  double d_tip_right() const { return z_.back(); }
  /// Index of the node at z = 0.
  std::size_t origin() const { return origin_; }
  double r_max() const;

  /// Largest violations of the slope and concavity bounds (0 when fine).
  struct InvariantReport {
    double slope_excess = 0;
    double concavity_excess = 0;
    bool ok() const { return slope_excess == 0 && concavity_excess == 0; }
  };
  InvariantReport check_invariants(const InvariantTolerances& tol = {}) const;

  /// F at an arbitrary point by monotone cubic interpolation.
  double value_at(double z) const;

 private:
  std::vector<double> z_, f_;
  EndKind left_ = EndKind::Tip, right_ = EndKind::Tip;
  std::size_t origin_ = 0;
};

struct CurvatureField {
  std::vector<double> k_orb, k_rad, R;
};

/// Sectional and scalar curvatures at every node. Tip nodes take the smooth-cap limit.
CurvatureField curvatures(const Profile& p);

double tip_scalar_curvature(const Profile& p, Side side);

/// sup over |z - z0| <= window of |F/F(z0) - 1| + |F_z| + F(z0)|F_zz|.
double neck_quality(const Profile& p, double z0, double window);

void write_profile_csv(std::ostream& os, const Profile& p);
Profile read_profile_csv(std::istream& is);

}  // namespace ovals

namespace ovals {

/// F_z and F_zz at every node of a profile given as raw arrays. The `band` nodes
/// nearest each end use five-point stencils over reflected ghost values (F is odd
/// about a smooth tip, even about an open end); the rest use three-point stencils.
/// Near a tip (1 - F_z^2)/F^2 is a ratio of small quantities, so the wider
/// stencil is what keeps the curvature convergent there.
void profile_derivatives(const std::vector<double>& z, const std::vector<double>& f,
                         EndKind left, EndKind right, std::vector<double>& fz,
                         std::vector<double>& fzz, std::size_t band = SIZE_MAX);

/// Limit of F_zz/F at a tip node from the even expansion through the two nearest
/// interior values of `g` (any quantity smooth and even about the tip).
double even_extrapolate_to_tip(const std::vector<double>& z, const std::vector<double>& g,
                               Side side);

}  // namespace ovals
