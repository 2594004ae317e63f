#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esw/acoustic.hpp"
#include "esw/model.hpp"

namespace esw {

/// Uniform node grid on [z_min, 0]. Node 0 sits at z_min and carries the
/// clamped (zero displacement) condition; node `cells` is the free surface.
struct DepthGrid {
  double z_min = -1.0;
  int cells = 16;

  double spacing() const { return -z_min / cells; }
  int nodes() const { return cells + 1; }
  double node(int i) const { return z_min + spacing() * i; }
};

/// Grid heuristic: the domain extends below Z_I by a multiple of the slowest
/// tail decay length, and the spacing resolves the shortest vertical
/// oscillation at the essential-spectrum edge with nodes_per_wavelength
/// nodes.
DepthGrid default_grid(const MaterialModel& model, const Vector2d& x,
                       const Vector2d& xi_hat, double k,
                       double nodes_per_wavelength = 20.0);

/// Decoupled subsystems available for isotropic, transversely isotropic and
/// monoclinic (x2,Z) models at xi_hat = (1,0): `love` is the horizontally
/// polarized scalar problem, `rayleigh` the coupled sagittal pair.
enum class Family { full, love, rayleigh };

struct Mode {
  double lambda = 0.0;            // eigenvalue of the reduced operator
  Eigen::MatrixXcd u;             // 3 x nodes, physical components, B-orthonormal
  Family polarization = Family::full;
  double bc_residual = 0.0;       // traction norm at the surface
  double decay_rate = 0.0;        // fitted tail rate of ln|u|, 0 if not fittable
  bool truncation_suspect = false;
  int multiplicity = 1;           // size of the near-degenerate cluster
};

struct SpectralResult {
  double k = 0.0;
  Vector2d xi_hat = Vector2d(1.0, 0.0);
  double threshold = 0.0;  // essential-spectrum edge of the governing subsystem
  double guard = 0.0;      // relative guard band excluded below the threshold
  DepthGrid grid;
  std::vector<Mode> modes;  // ascending eigenvalue
  std::vector<std::string> warnings;
};

struct SpectrumOptions {
  double guard = 1e-3;
  double tail_mass_tol = 1e-6;
  bool want_vectors = true;
};

/// Dense view of the assembled P1 system for the full three-component
/// operator: a is Hermitian, b symmetric positive definite (mass).
struct AssembledSystem {
  Eigen::MatrixXcd a, b;
  DepthGrid grid;
  double k = 0.0;
  int components = 3;
};

AssembledSystem assemble_h0(const MaterialModel& model, const Vector2d& x,
                            const Vector2d& xi, const DepthGrid& grid);

/// Discrete spectrum below the guarded essential-spectrum edge for the full
/// three-component operator at covector xi.
SpectralResult discrete_spectrum(const MaterialModel& model, const Vector2d& x,
                                 const Vector2d& xi, const DepthGrid& grid,
                                 const SpectrumOptions& opts = {});

/// Scalar horizontally polarized spectrum (isotropic or transversely
/// isotropic model; also valid for monoclinic (x2,Z) via the same contraction).
SpectralResult love_spectrum(const MaterialModel& model, const Vector2d& x,
                             double k, const DepthGrid& grid,
                             const SpectrumOptions& opts = {});

/// Coupled sagittal spectrum (isotropic or transversely isotropic model).
SpectralResult rayleigh_spectrum(const MaterialModel& model, const Vector2d& x,
                                 double k, const DepthGrid& grid,
                                 const SpectrumOptions& opts = {});

/// Both decoupled families merged and tagged, for TI (or isotropic) models.
SpectralResult ti_spectrum(const MaterialModel& model, const Vector2d& x, double k,
                           const DepthGrid& grid, const SpectrumOptions& opts = {});

/// Scalar u2 family plus coupled (u1,u3) family for monoclinic (x2,Z) models,
/// propagation along x1.
SpectralResult monoclinic_spectrum(const MaterialModel& model, const Vector2d& x,
                                   double k, const DepthGrid& grid,
                                   const SpectrumOptions& opts = {});

/// Number of eigenvalues <= E k^2; requires E below the subsystem threshold.
int counting_function(const MaterialModel& model, const Vector2d& x,
                      const Vector2d& xi, double energy,
                      Family family = Family::full, const DepthGrid* grid = nullptr);

/// Essential-spectrum edge of a family in velocity-squared units: the
/// minimum over real vertical wavenumber of the smallest symbol eigenvalue of
/// the constant tail material. For the full family this equals the squared
/// limiting velocity, reached by an independent route.
double symbol_floor(const MaterialModel& model, const Vector2d& x,
                    const Vector2d& xi_hat, Family family = Family::full);

enum class CurveStatus { complete, branch_lost, branch_exhausted };

struct DispersionSample {
  double k = 0.0;
  double lambda = 0.0;
  double phase_velocity = 0.0;
  double group_velocity = 0.0;      // Hellmann-Feynman
  double fd_group_velocity = 0.0;   // central difference, when requested
  bool has_fd = false;
  std::string flag;                 // empty, "lost" or "exhausted" on the last sample
};

struct DispersionCurve {
  int branch = 0;
  Family family = Family::full;
  CurveStatus status = CurveStatus::complete;
  std::vector<DispersionSample> samples;
};

struct DispersionOptions {
  double overlap_min = 0.5;  // branch identity threshold across k steps
  bool fd_check = false;     // also compute central-difference group velocity
  SpectrumOptions spectrum;
};

/// Follow branch `branch` (index in the spectrum at k_list.front()) across
/// increasing k, keeping branch identity by eigenfunction overlap in the mass
/// inner product. The same grid is used for every k.
DispersionCurve dispersion_curve(const MaterialModel& model, const Vector2d& x,
                                 const Vector2d& xi_hat,
                                 const std::vector<double>& k_list, int branch,
                                 const DepthGrid& grid, Family family = Family::full,
                                 const DispersionOptions& opts = {});

}  // namespace esw
