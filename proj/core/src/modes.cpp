#include "esw/modes.hpp"

#include <algorithm>
#include <cmath>

#include "esw/errors.hpp"

namespace esw {
namespace {

SpectralResult family_solve(const MaterialModel& model, const Vector2d& x,
                            double k, ModeType type, const ModeOptions& opts) {
  const DepthGrid grid =
      opts.grid ? *opts.grid : default_grid(model, x, Vector2d(1.0, 0.0), k);
  SpectrumOptions sopts = opts.spectrum;
  sopts.want_vectors = false;
  return type == ModeType::toroidal ? love_spectrum(model, x, k, grid, sopts)
                                    : rayleigh_spectrum(model, x, k, grid, sopts);
}

}  // namespace

double degree_wavenumber(double epsilon, int l, bool jeans) {
  return jeans ? epsilon * (l + 0.5)
               : epsilon * std::sqrt(static_cast<double>(l) * (l + 1.0));
}

ModeCatalog mode_catalog(const MaterialModel& model, const Vector2d& x,
                         double epsilon, int l_min, int l_max,
                         const ModeOptions& opts) {
  if (!(epsilon > 0.0)) throw OutOfDomainError("epsilon must be positive");
  if (l_min < 1 || l_max < l_min)
    throw OutOfDomainError("need 1 <= l_min <= l_max");
  ModeCatalog cat;
  cat.epsilon = epsilon;
  cat.jeans = opts.jeans;
  cat.l_min = l_min;
  cat.l_max = l_max;
  for (int pass = 0; pass < 2; ++pass) {
    const ModeType type = pass == 0 ? ModeType::toroidal : ModeType::spheroidal;
    if (type == ModeType::toroidal && !opts.toroidal) continue;
    if (type == ModeType::spheroidal && !opts.spheroidal) continue;
    for (int l = l_min; l <= l_max; ++l) {
      const double k = degree_wavenumber(epsilon, l, opts.jeans);
      const SpectralResult spec = family_solve(model, x, k, type, opts);
      const int keep = std::min<int>(opts.n_max, static_cast<int>(spec.modes.size()));
      for (int n = 0; n < keep; ++n) {
        ModeEntry e;
        e.type = type;
        e.l = l;
        e.n = n;
        e.k = k;
        e.lambda = spec.modes[n].lambda;
        e.omega = std::sqrt(e.lambda);
        e.degeneracy = 2 * l + 1;
        cat.entries.push_back(e);
      }
    }
  }
  return cat;
}

ModeCheck asymptotic_mode_check(const MaterialModel& model, const Vector2d& x,
                                const ModeCatalog& catalog,
                                const ModeOptions& opts) {
  ModeCheck out;
  // Fresh solves per (type, degree); entries of the catalog must reproduce
  // them to machine accuracy since both run the same discrete path.
  int idx = 0;
  while (idx < static_cast<int>(catalog.entries.size())) {
    const ModeEntry& head = catalog.entries[idx];
    const double k = degree_wavenumber(catalog.epsilon, head.l, catalog.jeans);
    const SpectralResult spec = family_solve(model, x, k, head.type, opts);
    while (idx < static_cast<int>(catalog.entries.size()) &&
           catalog.entries[idx].type == head.type &&
           catalog.entries[idx].l == head.l) {
      const ModeEntry& e = catalog.entries[idx];
      if (e.n < static_cast<int>(spec.modes.size())) {
        // Compare frequency to frequency: the square root of a bit-identical
        // eigenvalue is itself bit-identical, while squaring the cataloged
        // omega would cost a rounding ulp.
        const double omega = std::sqrt(spec.modes[e.n].lambda);
        const double res = std::abs(omega - e.omega) / e.omega;
        out.max_quantization_residual = std::max(out.max_quantization_residual, res);
        ++out.compared;
      }
      ++idx;
    }
  }
  // Frequencies must increase with degree at fixed overtone and type.
  for (const auto& a : catalog.entries)
    for (const auto& b : catalog.entries)
      if (a.type == b.type && a.n == b.n && a.l < b.l && !(a.omega < b.omega))
        out.omega_monotone_in_l = false;
  return out;
}

}  // namespace esw
