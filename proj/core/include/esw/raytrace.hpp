#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "esw/model.hpp"
#include "esw/spectrum.hpp"

namespace esw {

/// One interpolation axis: strictly increasing nodes. The lateral and angular
/// spline axes require uniform spacing; the Hermite k axis does not. A
/// single-node axis is constant (degenerate).
struct FieldAxis {
  std::vector<double> nodes;
  bool periodic = false;
  double period = 0.0;
};

/// Sampled surface-wave eigenvalue of one branch over lateral position,
/// propagation angle and log wavenumber, with analytic derivatives.
///
/// The interpolant carries the log of the eigenvalue: a nondispersive branch
/// is then exactly linear along the log-k axis, so group and phase velocity
/// coincide to rounding rather than to interpolation error. The k direction
/// is cubic Hermite using the sampled group slope at each node, so the
/// interpolant reproduces both the dispersion samples and their group
/// velocities; the lateral and angular directions use cardinal (Catmull-Rom)
/// cubics, periodic in angle. All ray-equation derivatives up to second order
/// come from this single interpolant, so a traced ray sees an exactly
/// conservative Hamiltonian up to integrator error.
class HamiltonianField {
 public:
  struct Eval {
    double value = 0.0;       // branch eigenvalue
    Eigen::Vector4d grad;     // d/d(x1, x2, theta, logk)
    Eigen::Matrix4d hess;
  };

  /// Interpolated eigenvalue and derivatives; throws OutOfDomainError outside
  /// the sampled box (angle is periodic, degenerate axes accept anything).
  Eval evaluate(double x1, double x2, double theta, double logk) const;

  /// Frequency sqrt(eigenvalue) and its first and second derivatives with
  /// respect to (x1, x2, xi1, xi2).
  struct PhaseSpaceEval {
    double h = 0.0;
    Eigen::Vector2d h_x, h_xi;
    Eigen::Matrix2d h_xx, h_xxi, h_xixi;  // h_xxi(i,j) = d2 h / dx_i dxi_j
  };
  PhaseSpaceEval phase_space(const Eigen::Vector2d& x,
                             const Eigen::Vector2d& xi) const;

  FieldAxis x1, x2, theta, logk;
  std::vector<double> values;  // log eigenvalue, flattened [i1][i2][itheta][ik]
  std::vector<double> slopes;  // d log-value / d logk at the same nodes
  Family family = Family::full;
  int branch = 0;
  double cv_error = 0.0;  // worst relative probe mismatch seen at build time
  std::uint64_t model_hash = 0;
};

struct FieldOptions {
  Family family = Family::full;
  int branch = 0;
  int probes = 4;          // interior cross-validation solves after sampling
  std::uint64_t probe_seed = 12345;
  double overlap_min = 0.5;
  std::optional<DepthGrid> grid;      // shared solver grid; auto-sized if unset
  double nodes_per_wavelength = 12.0; // auto grid resolution
  SpectrumOptions spectrum;
};

/// Sample one dispersion branch over the requested grid by overlap
/// continuation in k at every (position, angle) column. Throws
/// BranchAbsentError when the branch is missing or lost anywhere.
HamiltonianField build_hamiltonian(const MaterialModel& model,
                                   const std::vector<double>& x1_nodes,
                                   const std::vector<double>& x2_nodes,
                                   const std::vector<double>& theta_nodes,
                                   const std::vector<double>& k_nodes,
                                   const FieldOptions& opts = {});

enum class FanKind { point, plane };
enum class StopReason { time_end, domain_exit };

struct RaySample {
  double t = 0.0;
  Eigen::Vector2d x, xi;
  double h = 0.0;      // Hamiltonian (frequency) at the sample
  double phase = 0.0;  // integral of xi . dx
  double tau = 0.0;    // phase divided by frequency, integrated as an ODE
  Eigen::Matrix4d v;   // d(x, xi) / d(x0, xi0)
  double det_j = 0.0;  // paraxial spreading determinant for the chosen fan
  double a0 = 0.0;     // transport amplitude relative to t_ref
};

struct RayResult {
  std::vector<RaySample> samples;
  StopReason stop = StopReason::time_end;
  FanKind fan = FanKind::point;
  double h0 = 0.0;
  double h_drift = 0.0;  // max relative Hamiltonian drift along the ray
  double t_ref = 0.0;    // amplitude reference time
  std::vector<double> caustic_times;  // sign changes of det_j
};

struct TraceOptions {
  double t_max = 1.0;
  double dt0 = 1e-3;
  double tol = 1e-10;   // step-doubling local error target
  double dt_min = 1e-12;
  int max_steps = 200000;
  FanKind fan = FanKind::point;
  double t_ref = -1.0;  // < 0: first accepted sample time
};

/// Integrate the ray, phase, and paraxial system from x0 with initial
/// covector k0 (cos theta0, sin theta0) using adaptive step-doubling RK4.
/// Throws StepRejectedError when the controller underflows dt_min.
RayResult trace_ray(const HamiltonianField& field, const Eigen::Vector2d& x0,
                    double theta0, double k0, const TraceOptions& opts = {});

/// Transport amplitude at time t along a traced ray (linear det_j lookup).
double transport_amplitude(const RayResult& ray, double t);

struct RayVelocities {
  Eigen::Vector2d group;
  double group_speed = 0.0;
  double phase_speed = 0.0;
};

RayVelocities group_and_phase_velocity(const HamiltonianField& field,
                                       const Eigen::Vector2d& x, double theta,
                                       double k);

/// Wavenumber solving sqrt(eigenvalue) = omega at fixed position and angle by
/// bisection over the sampled k range. Throws NoRootError when omega is not
/// bracketed.
double wavenumber_for_frequency(const HamiltonianField& field,
                                const Eigen::Vector2d& x, double theta,
                                double omega);

}  // namespace esw
