#pragma once

#include <optional>
#include <vector>

#include "esw/model.hpp"
#include "esw/spectrum.hpp"

namespace esw {

enum class ModeType { toroidal, spheroidal };

/// One multiplet of the gravity-free spherical catalog: angular degree l,
/// overtone n, frequency from the flat decoupled solver at the equivalent
/// horizontal wavenumber.
struct ModeEntry {
  ModeType type = ModeType::toroidal;
  int l = 0;
  int n = 0;
  double k = 0.0;       // equivalent horizontal wavenumber for this degree
  double lambda = 0.0;  // flat-operator eigenvalue
  double omega = 0.0;   // sqrt(lambda)
  int degeneracy = 1;   // 2l + 1
};

struct ModeOptions {
  bool jeans = false;  // k = eps (l + 1/2) instead of eps sqrt(l (l+1))
  int n_max = 8;       // overtones kept per degree and type
  bool toroidal = true;
  bool spheroidal = true;
  std::optional<DepthGrid> grid;  // shared solver grid; sized per degree if unset
  SpectrumOptions spectrum;
};

struct ModeCatalog {
  double epsilon = 0.0;
  bool jeans = false;
  int l_min = 0, l_max = 0;
  std::vector<ModeEntry> entries;  // ordered by (type, l, n)
};

/// Catalog of high-degree normal modes in the surface-wave regime: each
/// degree l maps to the wavenumber eps sqrt(l(l+1)), toroidal multiplets come
/// from the horizontally polarized flat solver and spheroidal ones from the
/// sagittal solver, evaluated through the very same code path as the flat
/// dispersion computations.
ModeCatalog mode_catalog(const MaterialModel& model, const Vector2d& x,
                         double epsilon, int l_min, int l_max,
                         const ModeOptions& opts = {});

/// Consistency audit of a catalog against fresh flat solves: the worst
/// relative quantization residual |Lambda(k_l) - omega^2| / omega^2 and
/// monotonicity of omega in l at fixed overtone and type.
struct ModeCheck {
  double max_quantization_residual = 0.0;
  bool omega_monotone_in_l = true;
  int compared = 0;
};

ModeCheck asymptotic_mode_check(const MaterialModel& model, const Vector2d& x,
                                const ModeCatalog& catalog,
                                const ModeOptions& opts = {});

/// Wavenumber assigned to degree l.
double degree_wavenumber(double epsilon, int l, bool jeans);

}  // namespace esw
