#include "esw/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banded.hpp"
#include "esw/errors.hpp"
#include "family.hpp"

namespace esw {
namespace {

using detail::BandedHermitian;
using detail::check_decoupling;
using detail::family_components;
using detail::sub_block;
using detail::symbol_floor_of;
using std::complex;

constexpr complex<double> kImag{0.0, 1.0};

/// Per-element midpoint coefficients of one family, extracted as principal
/// sub-blocks of the acoustic triple at xi_hat = (1,0) for the decoupled
/// families. Extraction verifies that the discarded cross blocks actually
/// vanish, so a mis-tagged model fails loudly instead of silently dropping
/// coupling terms.
struct Coeffs {
  DepthGrid grid;
  int m = 3;
  std::vector<Eigen::MatrixXd> t, r, q;
  Eigen::MatrixXd t_surface, rt_surface;  // for the traction residual at Z=0
};

Coeffs build_coeffs(const MaterialModel& model, const Vector2d& x,
                    const Vector2d& xi_hat, const DepthGrid& grid, Family family) {
  if (grid.cells < 2 || grid.z_min >= model.z_i())
    throw OutOfDomainError(
        "depth grid needs at least two cells and z_min below the interface depth");
  const auto keep = family_components(family);
  Coeffs c;
  c.grid = grid;
  c.m = static_cast<int>(keep.size());
  c.t.reserve(grid.cells);
  c.r.reserve(grid.cells);
  c.q.reserve(grid.cells);
  const double h = grid.spacing();
  for (int e = 0; e < grid.cells; ++e) {
    const double z_mid = grid.node(e) + 0.5 * h;
    const AcousticTriple a = acoustic_triple(model, x, xi_hat, z_mid);
    if (family != Family::full) check_decoupling(a, keep);
    c.t.push_back(sub_block(a.t, keep));
    c.r.push_back(sub_block(a.r, keep));
    c.q.push_back(sub_block(a.q, keep));
  }
  const AcousticTriple surf = acoustic_triple(model, x, xi_hat, 0.0);
  c.t_surface = sub_block(surf.t, keep);
  c.rt_surface = sub_block(surf.r, keep).transpose();
  return c;
}

/// Stiffness assembly with independent weights on the three wavenumber
/// powers: A(k) = [wt] K_T + [wc] K_cross + [wq] K_Q where the full operator
/// is K_T + k K_cross + k^2 K_Q. The derivative matrix dA/dk is the same
/// assembly with weights (0, 1, 2k). Row and column indices drop the clamped
/// bottom node.
BandedHermitian assemble_stiffness(const Coeffs& c, double wt, double wc, double wq) {
  const int m = c.m;
  const int n = c.grid.cells * m;
  BandedHermitian a(n, 2 * m - 1);
  const double h = c.grid.spacing();
  for (int e = 0; e < c.grid.cells; ++e) {
    const Eigen::MatrixXd& t = c.t[e];
    const Eigen::MatrixXd& r = c.r[e];
    const Eigen::MatrixXd& q = c.q[e];
    for (int la = 0; la < 2; ++la) {
      const int na = e + la;
      if (na == 0) continue;
      const double sa = la == 0 ? -1.0 : 1.0;
      for (int lb = 0; lb < 2; ++lb) {
        const int nb = e + lb;
        if (nb == 0) continue;
        const double sb = lb == 0 ? -1.0 : 1.0;
        const double mass = (la == lb) ? h / 3.0 : h / 6.0;
        for (int i = 0; i < m; ++i) {
          const int row = (na - 1) * m + i;
          for (int l = 0; l < m; ++l) {
            const int col = (nb - 1) * m + l;
            if (row < col) continue;
            const complex<double> v =
                wt * t(i, l) * sa * sb / h +
                wc * kImag * (r(l, i) * sa - r(i, l) * sb) * 0.5 +
                wq * q(i, l) * mass;
            a.add(row, col, v);
          }
        }
      }
    }
  }
  return a;
}

BandedHermitian assemble_mass(const Coeffs& c) {
  const int m = c.m;
  const int n = c.grid.cells * m;
  BandedHermitian b(n, m);
  const double h = c.grid.spacing();
  for (int e = 0; e < c.grid.cells; ++e)
    for (int la = 0; la < 2; ++la) {
      const int na = e + la;
      if (na == 0) continue;
      for (int lb = 0; lb < 2; ++lb) {
        const int nb = e + lb;
        if (nb == 0) continue;
        const double mass = (la == lb) ? h / 3.0 : h / 6.0;
        for (int i = 0; i < m; ++i) {
          const int row = (na - 1) * m + i;
          const int col = (nb - 1) * m + i;
          if (row >= col) b.add(row, col, mass);
        }
      }
    }
  return b;
}

/// Essential-spectrum edge in velocity-squared units, from the material at
/// the interface depth (the tail governs the half-line at infinity).
double threshold_vsq(const MaterialModel& model, const Vector2d& x,
                     const Vector2d& xi_hat, Family family) {
  if (family == Family::full) {
    const double v = limiting_velocity(model, x, xi_hat, model.z_i()).v_l;
    return v * v;
  }
  const auto keep = family_components(family);
  const AcousticTriple a = acoustic_triple(model, x, xi_hat, model.z_i());
  check_decoupling(a, keep);
  return symbol_floor_of(sub_block(a.t, keep), sub_block(a.r, keep),
                         sub_block(a.q, keep));
}

/// Deterministic phase: rotate so the entry of largest magnitude is real
/// positive (first index wins ties).
void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index at = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      at = i;
    }
  if (best <= 0.0) return;
  v *= std::conj(v(at)) / best;
}

struct FamilySolve {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // solver basis (clamped node removed), B-orthonormal
  double threshold = 0.0;
};

FamilySolve solve_family(const Coeffs& c, double k, double thr_vsq,
                         const SpectrumOptions& opts) {
  BandedHermitian a = assemble_stiffness(c, 1.0, k, k * k);
  BandedHermitian b = assemble_mass(c);
  const double vu = thr_vsq * k * k * (1.0 - opts.guard);
  const double vl = -1.0 - 0.125 * vu;
  FamilySolve out;
  out.threshold = thr_vsq * k * k;
  if (opts.want_vectors) {
    auto res = detail::banded_eigenpairs_range(std::move(a), std::move(b), vl, vu);
    out.values = std::move(res.values);
    out.vectors = std::move(res.vectors);
  } else {
    out.values = detail::banded_eigenvalues_range(std::move(a), std::move(b), vl, vu);
  }
  return out;
}

double tail_decay_rate(const Eigen::VectorXd& amp, const DepthGrid& grid,
                       double z_from) {
  // Least-squares slope of ln|u| against depth over the region below z_from.
  std::vector<double> zs, ls;
  const double peak = amp.maxCoeff();
  for (int i = 0; i < amp.size(); ++i) {
    const double z = grid.node(i);
    if (z > z_from) continue;
    if (amp(i) < 1e-14 * peak || amp(i) <= 0.0) continue;
    zs.push_back(z);
    ls.push_back(std::log(amp(i)));
  }
  if (zs.size() < 3) return 0.0;
  double sz = 0, sl = 0, szz = 0, szl = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    sz += zs[i];
    sl += ls[i];
    szz += zs[i] * zs[i];
    szl += zs[i] * ls[i];
  }
  const double nn = static_cast<double>(zs.size());
  const double den = nn * szz - sz * sz;
  if (den <= 0.0) return 0.0;
  return (nn * szl - sz * sl) / den;
}

SpectralResult postprocess(const MaterialModel& model, const Coeffs& c, double k,
                           const Vector2d& xi_hat, Family family,
                           const FamilySolve& sol, const SpectrumOptions& opts) {
  const auto keep = family_components(family);
  const int m = c.m;
  const int nodes = c.grid.nodes();
  const double h = c.grid.spacing();
  SpectralResult res;
  res.k = k;
  res.xi_hat = xi_hat;
  res.threshold = sol.threshold;
  res.guard = opts.guard;
  res.grid = c.grid;
  const int count = static_cast<int>(sol.values.size());
  res.modes.resize(count);
  int suspects = 0;
  for (int idx = 0; idx < count; ++idx) {
    Mode& mode = res.modes[idx];
    mode.lambda = sol.values(idx);
    mode.polarization = family;
    if (!opts.want_vectors) continue;
    Eigen::VectorXcd v = sol.vectors.col(idx);
    fix_phase(v);
    mode.u = Eigen::MatrixXcd::Zero(3, nodes);
    for (int node = 1; node < nodes; ++node)
      for (int ci = 0; ci < m; ++ci)
        mode.u(keep[ci], node) = v((node - 1) * m + ci);

    // Surface traction through the natural boundary condition, with a
    // second-order one-sided derivative.
    Eigen::VectorXcd u0(m), u1(m), u2(m);
    for (int ci = 0; ci < m; ++ci) {
      u0(ci) = mode.u(keep[ci], nodes - 1);
      u1(ci) = mode.u(keep[ci], nodes - 2);
      u2(ci) = mode.u(keep[ci], nodes - 3);
    }
    const Eigen::VectorXcd du = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h);
    const Eigen::VectorXcd traction =
        c.t_surface * du + kImag * k * (c.rt_surface * u0);
    mode.bc_residual = traction.norm();

    Eigen::VectorXd amp(nodes);
    for (int node = 0; node < nodes; ++node) amp(node) = mode.u.col(node).norm();
    mode.decay_rate = tail_decay_rate(amp, c.grid, model.z_i());

    // Trapezoid mass fraction in the deepest tenth of the domain.
    const double cut = c.grid.z_min + 0.1 * std::abs(c.grid.z_min);
    double tail_mass = 0.0, total = 0.0;
    for (int node = 0; node < nodes; ++node) {
      const double w = (node == 0 || node == nodes - 1) ? 0.5 * h : h;
      const double cell = w * amp(node) * amp(node);
      total += cell;
      if (c.grid.node(node) <= cut) tail_mass += cell;
    }
    mode.truncation_suspect = total > 0.0 && tail_mass / total > opts.tail_mass_tol;
    if (mode.truncation_suspect) ++suspects;
  }
  // Cluster near-degenerate eigenvalues and record multiplicities.
  int start = 0;
  while (start < count) {
    int stop = start + 1;
    while (stop < count) {
      const double gap = sol.values(stop) - sol.values(stop - 1);
      if (gap > 1e-8 * std::max(sol.threshold, std::abs(sol.values(stop)))) break;
      ++stop;
    }
    for (int i = start; i < stop; ++i) res.modes[i].multiplicity = stop - start;
    start = stop;
  }
  if (suspects > 0)
    res.warnings.push_back(std::to_string(suspects) +
                           " mode(s) carry tail mass above tolerance; extend the "
                           "grid below z_min");
  return res;
}

SpectralResult spectrum_for(const MaterialModel& model, const Vector2d& x,
                            const Vector2d& xi_hat, double k, const DepthGrid& grid,
                            Family family, const SpectrumOptions& opts) {
  if (!(k > 0.0)) throw OutOfDomainError("wavenumber must be positive");
  const Coeffs c = build_coeffs(model, x, xi_hat, grid, family);
  const double thr = threshold_vsq(model, x, xi_hat, family);
  const FamilySolve sol = solve_family(c, k, thr, opts);
  return postprocess(model, c, k, xi_hat, family, sol, opts);
}

SpectralResult merge_tagged(SpectralResult a, SpectralResult b) {
  SpectralResult out = std::move(a);
  out.threshold = std::min(out.threshold, b.threshold);
  out.modes.insert(out.modes.end(), std::make_move_iterator(b.modes.begin()),
                   std::make_move_iterator(b.modes.end()));
  std::stable_sort(out.modes.begin(), out.modes.end(),
                   [](const Mode& l, const Mode& r) { return l.lambda < r.lambda; });
  out.warnings.insert(out.warnings.end(), b.warnings.begin(), b.warnings.end());
  return out;
}

void require_separable(const MaterialModel& model, const char* op) {
  if (model.symmetry() == Symmetry::general)
    throw SymmetryMismatchError(std::string(op) +
                                ": model symmetry does not admit decoupled families");
}

}  // namespace

DepthGrid default_grid(const MaterialModel& model, const Vector2d& x,
                       const Vector2d& xi_hat, double k,
                       double nodes_per_wavelength) {
  if (!(k > 0.0)) throw OutOfDomainError("wavenumber must be positive");
  const auto inf = infimum_limiting_velocity(model, x, xi_hat);
  const double v_tail = inf.v_l_interface;
  // Depth estimate: trapped modes near the essential edge decay with a rate
  // around k sqrt(1 - v^2/v_tail^2); budget ten decay lengths at a
  // representative v^2 = 0.75 v_tail^2, floored at five length units.
  const double decay_length = 1.0 / std::sqrt(1.0 - 0.75);
  const double depth = std::max(5.0, 10.0 / k * decay_length);
  DepthGrid grid;
  grid.z_min = model.z_i() - depth;
  // Resolution: the fastest vertical oscillation below the edge has
  // wavenumber about k * zeta_max with zeta_max from the spread between the
  // slowest layer and the tail.
  const double ratio = v_tail * v_tail / (inf.v_inf * inf.v_inf);
  const double zeta_max = std::max(1.0, std::sqrt(std::max(ratio - 1.0, 0.0)));
  const double span = -grid.z_min;
  const int cells = static_cast<int>(
      std::ceil(nodes_per_wavelength * k * span * zeta_max / (2.0 * M_PI)));
  grid.cells = std::clamp(cells, 16, 12000);
  return grid;
}

double symbol_floor(const MaterialModel& model, const Vector2d& x,
                    const Vector2d& xi_hat, Family family) {
  const auto keep = family_components(family);
  const AcousticTriple a = acoustic_triple(model, x, xi_hat, model.z_i());
  if (family != Family::full) check_decoupling(a, keep);
  return symbol_floor_of(sub_block(a.t, keep), sub_block(a.r, keep),
                         sub_block(a.q, keep));
}

AssembledSystem assemble_h0(const MaterialModel& model, const Vector2d& x,
                            const Vector2d& xi, const DepthGrid& grid) {
  const double k = xi.norm();
  if (!(k > 0.0)) throw OutOfDomainError("covector must be nonzero");
  const Vector2d xi_hat = xi / k;
  const Coeffs c = build_coeffs(model, x, xi_hat, grid, Family::full);
  AssembledSystem sys;
  sys.a = assemble_stiffness(c, 1.0, k, k * k).to_dense();
  sys.b = assemble_mass(c).to_dense();
  sys.grid = grid;
  sys.k = k;
  sys.components = 3;
  return sys;
}

SpectralResult discrete_spectrum(const MaterialModel& model, const Vector2d& x,
                                 const Vector2d& xi, const DepthGrid& grid,
                                 const SpectrumOptions& opts) {
  const double k = xi.norm();
  if (!(k > 0.0)) throw OutOfDomainError("covector must be nonzero");
  return spectrum_for(model, x, xi / k, k, grid, Family::full, opts);
}

SpectralResult love_spectrum(const MaterialModel& model, const Vector2d& x, double k,
                             const DepthGrid& grid, const SpectrumOptions& opts) {
  require_separable(model, "love_spectrum");
  return spectrum_for(model, x, Vector2d(1.0, 0.0), k, grid, Family::love, opts);
}

SpectralResult rayleigh_spectrum(const MaterialModel& model, const Vector2d& x,
                                 double k, const DepthGrid& grid,
                                 const SpectrumOptions& opts) {
  require_separable(model, "rayleigh_spectrum");
  return spectrum_for(model, x, Vector2d(1.0, 0.0), k, grid, Family::rayleigh, opts);
}

SpectralResult ti_spectrum(const MaterialModel& model, const Vector2d& x, double k,
                           const DepthGrid& grid, const SpectrumOptions& opts) {
  require_separable(model, "ti_spectrum");
  return merge_tagged(love_spectrum(model, x, k, grid, opts),
                      rayleigh_spectrum(model, x, k, grid, opts));
}

SpectralResult monoclinic_spectrum(const MaterialModel& model, const Vector2d& x,
                                   double k, const DepthGrid& grid,
                                   const SpectrumOptions& opts) {
  require_separable(model, "monoclinic_spectrum");
  return merge_tagged(
      spectrum_for(model, x, Vector2d(1.0, 0.0), k, grid, Family::love, opts),
      spectrum_for(model, x, Vector2d(1.0, 0.0), k, grid, Family::rayleigh, opts));
}

int counting_function(const MaterialModel& model, const Vector2d& x,
                      const Vector2d& xi, double energy, Family family,
                      const DepthGrid* grid) {
  const double k = xi.norm();
  if (!(k > 0.0)) throw OutOfDomainError("covector must be nonzero");
  const Vector2d xi_hat = xi / k;
  const double floor_vsq = threshold_vsq(model, x, xi_hat, family);
  if (!(energy < floor_vsq))
    throw OutOfDomainError(
        "counting energy must lie below the essential-spectrum edge");
  DepthGrid g = grid ? *grid : default_grid(model, x, xi_hat, k);
  const Coeffs c = build_coeffs(model, x, xi_hat, g, family);
  BandedHermitian a = assemble_stiffness(c, 1.0, k, k * k);
  BandedHermitian b = assemble_mass(c);
  const double vu = energy * k * k;
  const double vl = -1.0 - 0.125 * vu;
  return static_cast<int>(
      detail::banded_eigenvalues_range(std::move(a), std::move(b), vl, vu).size());
}

DispersionCurve dispersion_curve(const MaterialModel& model, const Vector2d& x,
                                 const Vector2d& xi_hat,
                                 const std::vector<double>& k_list, int branch,
                                 const DepthGrid& grid, Family family,
                                 const DispersionOptions& opts) {
  if (k_list.empty()) throw OutOfDomainError("empty wavenumber list");
  if (branch < 0) throw OutOfDomainError("branch index must be nonnegative");
  Vector2d dir = xi_hat.normalized();
  if (family != Family::full) dir = Vector2d(1.0, 0.0);
  const Coeffs c = build_coeffs(model, x, dir, grid, family);
  const double thr = threshold_vsq(model, x, dir, family);
  const BandedHermitian b = assemble_mass(c);
  SpectrumOptions sopts = opts.spectrum;
  sopts.want_vectors = true;

  DispersionCurve curve;
  curve.branch = branch;
  curve.family = family;
  curve.status = CurveStatus::complete;

  auto solve_at = [&](double k) { return solve_family(c, k, thr, sopts); };
  auto overlap_pick = [&](const Eigen::VectorXcd& prev, const FamilySolve& sol,
                          double& best) {
    best = -1.0;
    int at = -1;
    const Eigen::VectorXcd bp = detail::banded_apply(b, prev);
    for (int j = 0; j < sol.vectors.cols(); ++j) {
      const double ov = std::abs(sol.vectors.col(j).dot(bp));
      if (ov > best) {
        best = ov;
        at = j;
      }
    }
    return at;
  };
  auto hf_velocity = [&](double k, const Eigen::VectorXcd& v, double lambda) {
    BandedHermitian da = assemble_stiffness(c, 0.0, 1.0, 2.0 * k);
    const double dlam = std::real(v.dot(detail::banded_apply(da, v)));
    return dlam / (2.0 * std::sqrt(lambda));
  };

  Eigen::VectorXcd prev;
  int idx = branch;
  for (std::size_t step = 0; step < k_list.size(); ++step) {
    const double k = k_list[step];
    if (!(k > 0.0)) throw OutOfDomainError("wavenumbers must be positive");
    FamilySolve sol = solve_at(k);
    if (step == 0) {
      if (branch >= static_cast<int>(sol.values.size()))
        throw BranchAbsentError("branch " + std::to_string(branch) +
                                " not present at the first wavenumber");
      idx = branch;
    } else {
      if (sol.values.size() == 0) {
        if (!curve.samples.empty()) curve.samples.back().flag = "exhausted";
        curve.status = CurveStatus::branch_exhausted;
        break;
      }
      double best = 0.0;
      idx = overlap_pick(prev, sol, best);
      if (idx < 0 || best < opts.overlap_min) {
        if (!curve.samples.empty()) curve.samples.back().flag = "lost";
        curve.status = CurveStatus::branch_lost;
        break;
      }
    }
    const double lambda = sol.values(idx);
    const Eigen::VectorXcd v = sol.vectors.col(idx);
    DispersionSample smp;
    smp.k = k;
    smp.lambda = lambda;
    smp.phase_velocity = std::sqrt(lambda) / k;
    smp.group_velocity = hf_velocity(k, v, lambda);
    if (opts.fd_check) {
      const double dk = 1e-4 * k;
      double lam_lo = lambda, lam_hi = lambda;
      for (int side = 0; side < 2; ++side) {
        const double kk = side == 0 ? k - dk : k + dk;
        FamilySolve near = solve_at(kk);
        double best = 0.0;
        const int j = overlap_pick(v, near, best);
        if (j < 0 || best < opts.overlap_min) {
          smp.has_fd = false;
          break;
        }
        (side == 0 ? lam_lo : lam_hi) = near.values(j);
        smp.has_fd = side == 1;
      }
      if (smp.has_fd)
        smp.fd_group_velocity =
            (std::sqrt(lam_hi) - std::sqrt(lam_lo)) / (2.0 * dk);
    }
    curve.samples.push_back(std::move(smp));
    prev = v;
  }
  return curve;
}

}  // namespace esw
