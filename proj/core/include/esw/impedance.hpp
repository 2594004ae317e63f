#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "esw/acoustic.hpp"
#include "esw/model.hpp"

namespace esw {

using Eigen::Matrix3cd;
using Eigen::Vector3cd;

struct RootMatrixOptions {
  int min_nodes = 64;     // first trapezoid resolution on the contour
  int max_nodes = 4096;
  double tol = 1e-10;     // relative change between doublings
};

/// Spectral divisor of the quadratic pencil T z^2 + (R+R^T) z + (Q - v^2 I)
/// built from the three decaying (lower half-plane) roots. The primary
/// construction is a contour integral of the symmetrized resolvent; an
/// eigenvector-basis construction is run alongside whenever the roots are
/// simple enough, and the distance between the two is reported.
struct RootMatrix {
  Matrix3cd s1;
  std::array<std::complex<double>, 3> roots;  // decaying roots, sorted
  double quadrature_increment = 0.0;  // S1 change on the last node doubling
  double linear_residual = 0.0;       // S1^* T + T S1 + (R + R^T)
  double quadratic_residual = 0.0;    // S1^* T S1 - (Q - v^2 I)
  bool cross_checked = false;         // eigenvector construction ran
  double cross_check_distance = 0.0;  // relative distance between the routes
};

RootMatrix root_matrix(const AcousticTriple& a, double v,
                       const RootMatrixOptions& opts = {});

/// Surface impedance of the half-space problem at horizontal slowness
/// direction baked into the triple. Hermitian for 0 <= v < v_L; positive
/// definite at v = 0 and loses definiteness through a single eigenvalue as v
/// grows.
struct ImpedanceResult {
  Matrix3cd z;
  RootMatrix divisor;
  double hermiticity = 0.0;       // || z - z^H ||
  double riccati_residual = 0.0;  // (z + iR) T^{-1} (z - iR^T) - (Q - v^2 I)
};

ImpedanceResult impedance(const AcousticTriple& a, double v,
                          const RootMatrixOptions& opts = {});

/// Impedance of the surface material at lateral position x.
ImpedanceResult impedance(const MaterialModel& model, const Vector2d& x,
                          const Vector2d& xi_hat, double v,
                          const RootMatrixOptions& opts = {});

/// dZ/dv, the unique solution of the divisor Sylvester equation; Hermitian
/// and negative definite on 0 < v < v_L.
Matrix3cd impedance_derivative(const AcousticTriple& a, double v,
                               const RootMatrixOptions& opts = {});

struct BarnettLotheOptions {
  int j_lo = 3;   // ladder of velocities v_L (1 - 2^-j)
  int j_hi = 12;
  RootMatrixOptions root;
};

/// Existence test for a subsonic free surface wave: extrapolate det Z and the
/// second invariant (tr Z)^2 - tr(Z^2) to the limiting velocity along a
/// sqrt-spaced ladder and test their signs.
struct BarnettLotheResult {
  bool exists = false;
  double det_limit = 0.0;
  double invariant2_limit = 0.0;
  double v_l = 0.0;
  std::array<double, 2> ladder_drift = {0.0, 0.0};  // last extrapolant steps
};

BarnettLotheResult barnett_lothe(const AcousticTriple& a,
                                 const BarnettLotheOptions& opts = {});

/// Subsonic secular equation: the velocity where the smallest eigenvalue of
/// Z(v) crosses zero, with the corresponding surface polarization.
struct SecularRoot {
  double v = 0.0;
  Vector3cd kernel;
  double lambda_min = 0.0;  // smallest impedance eigenvalue at the root
  int bisections = 0;
};

SecularRoot secular_root(const AcousticTriple& a,
                         const RootMatrixOptions& opts = {});

}  // namespace esw
