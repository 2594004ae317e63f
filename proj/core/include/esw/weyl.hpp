#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "esw/acoustic.hpp"
#include "esw/model.hpp"
#include "esw/spectrum.hpp"

namespace esw {

/// Eigenvalues (ascending) of the frozen-depth symbol of one family at
/// vertical wavenumber zeta, in units where the horizontal wavenumber is 1.
Eigen::VectorXd branch_functions(const AcousticTriple& a, double zeta,
                                 Family family = Family::full);

struct VolumeOptions {
  double rel_tol = 1e-9;  // adaptive depth quadrature target
  int max_refine = 30;
};

/// Area of {(z, zeta) : branch(z, zeta) < energy}, branches counted with
/// multiplicity. The zeta cross-section at each depth is computed exactly
/// from the real roots of the shifted characteristic polynomial; depth
/// integration is exact per layer for step profiles and adaptive Simpson
/// otherwise. Requires energy below the tail symbol floor so the region is
/// confined above the interface depth.
struct PhaseSpaceVolume {
  double value = 0.0;
  bool branch_tangency = false;  // nearly repeated section endpoints seen
  int evaluations = 0;           // depth evaluations of the section measure
};

PhaseSpaceVolume phase_space_volume(const MaterialModel& model, const Vector2d& x,
                                    const Vector2d& xi_hat, double energy,
                                    Family family = Family::full,
                                    const VolumeOptions& opts = {});

/// Monte Carlo estimate of the same area over an enclosing box, for
/// cross-checking the exact-section quadrature. Deterministic for a fixed
/// seed.
struct MonteCarloVolume {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

MonteCarloVolume phase_space_volume_mc(const MaterialModel& model, const Vector2d& x,
                                       const Vector2d& xi_hat, double energy,
                                       Family family, std::size_t samples,
                                       std::uint64_t seed);

/// Eigenvalue-count law check: compare the counting function at each k with
/// the first-order prediction k * area / (2 pi).
struct WeylRow {
  double k = 0.0;
  int counted = 0;
  double predicted = 0.0;
  double rel_error = 0.0;
};

struct WeylCheck {
  PhaseSpaceVolume volume;
  std::vector<WeylRow> rows;
  bool improving = false;  // relative error decreasing over the last three rows
};

WeylCheck weyl_check(const MaterialModel& model, const Vector2d& x,
                     const Vector2d& xi_hat, double energy, Family family,
                     const std::vector<double>& k_list,
                     const DepthGrid* grid = nullptr,
                     const VolumeOptions& opts = {});

}  // namespace esw
