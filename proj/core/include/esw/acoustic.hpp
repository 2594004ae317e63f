#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "esw/model.hpp"

namespace esw {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Vector6cd = Eigen::Matrix<std::complex<double>, 6, 1>;

/// Contractions of the density-normalized stiffness against the propagation
/// direction xi_hat (horizontal unit vector) and the surface normal e3:
///   t_il = C_i33l,  r_il = sum_j C_ij3l xihat_j,  q_il = sum_jk C_ijkl xihat_j xihat_k.
/// t and q are symmetric positive definite for strongly convex stiffness.
struct AcousticTriple {
  Matrix3d t, r, q;
};

AcousticTriple acoustic_triple(const VoigtMatrix& c, const Vector2d& xi_hat);
AcousticTriple acoustic_triple(const MaterialModel& model, const Vector2d& x,
                               const Vector2d& xi_hat, double z);

/// Triple for the direction pair rotated by rho in the (xi_hat, e3) plane,
/// contracted with the shifted tensor C_ijkl - v^2 xihat_j xihat_k delta_il.
/// Satisfies q(rho+pi/2) = t(rho), r(rho+pi/2) = -r(rho)^T, t(rho+pi/2) = q(rho)
/// at v = 0.
AcousticTriple rotated_triple(const AcousticTriple& base, double rho, double v);

struct SexticProblem {
  std::array<double, 7> coeff;  // coeff[p] multiplies zeta^p
  Vector6cd roots;              // sorted by increasing imaginary part, then real
};

/// Characteristic polynomial det[t z^2 + (r + r^T) z + q - v^2 I] with roots
/// from the balanced companion matrix plus one Newton polish per root.
SexticProblem sextic(const AcousticTriple& triple, double v);

/// The three roots with negative imaginary part (depth-decaying family).
/// Throws DegenerateRootsError when a root sits within axis_tol (relative to
/// the root magnitude scale) of the real axis, which happens at and above the
/// limiting velocity.
std::array<std::complex<double>, 3> lower_roots(const SexticProblem& sx,
                                                double axis_tol = 1e-9);

struct LimitingVelocityOptions {
  int n_rho = 181;         // dense rho scan of [-pi/2, pi/2]
  double rel_tol = 1e-10;  // bisection stopping width relative to v_L
};

struct LimitingVelocityResult {
  double v_l = 0.0;
  std::vector<double> minimizing_angles;  // rho values where det q(rho; v_L) vanishes
  int bisection_steps = 0;
};

/// Smallest v > 0 at which det q(rho; v) vanishes for some rotation angle.
/// Bisection in v over an exact bracket; each evaluation minimizes the
/// determinant over rho by dense scan plus golden-section refinement.
LimitingVelocityResult limiting_velocity(const AcousticTriple& base,
                                         const LimitingVelocityOptions& opts = {});
LimitingVelocityResult limiting_velocity(const MaterialModel& model,
                                         const Vector2d& x, const Vector2d& xi_hat,
                                         double z,
                                         const LimitingVelocityOptions& opts = {});

struct InfimumVelocityResult {
  double v_inf = 0.0;
  double z_at_min = 0.0;
  double v_l_surface = 0.0;
  double v_l_interface = 0.0;
  bool decreasing_with_depth = false;  // v_inf < v_L(Z_I) strictly
  bool minimum_at_surface = false;     // v_L(0) attains the infimum
};

/// Minimum of the limiting velocity over depth, searched on the knot depths
/// and interval midpoints down to Z_I (the tail is constant below).
InfimumVelocityResult infimum_limiting_velocity(const MaterialModel& model,
                                                const Vector2d& x,
                                                const Vector2d& xi_hat,
                                                const LimitingVelocityOptions& opts = {});

}  // namespace esw
