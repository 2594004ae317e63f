#include "esw/weyl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include "esw/errors.hpp"
#include "family.hpp"
#include "polyroots.hpp"

namespace esw {
namespace {

using detail::check_decoupling;
using detail::decouples;
using detail::family_components;
using detail::sub_block;

struct SubTriple {
  Eigen::MatrixXd t, rs, q;  // rs = r + r^T
};

SubTriple sub_triple(const AcousticTriple& a, const std::vector<int>& keep) {
  if (static_cast<int>(keep.size()) != 3) check_decoupling(a, keep);
  SubTriple s;
  s.t = sub_block(a.t, keep);
  const Eigen::MatrixXd r = sub_block(a.r, keep);
  s.rs = r + r.transpose();
  s.q = sub_block(a.q, keep);
  return s;
}

Eigen::MatrixXd symbol_at(const SubTriple& s, double zeta) {
  return s.t * zeta * zeta + s.rs * zeta + s.q;
}

int count_below(const SubTriple& s, double zeta, double energy) {
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(symbol_at(s, zeta),
                                                     Eigen::EigenvaluesOnly)
          .eigenvalues();
  int n = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) < energy) ++n;
  return n;
}

using Quad = std::array<double, 3>;  // quadratic in zeta, coefficient per power

std::vector<double> conv(const std::vector<double>& a, const Quad& b) {
  std::vector<double> out(a.size() + 2, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// det(T zeta^2 + RS zeta + Q - E I) as a polynomial in zeta, m <= 3.
std::vector<double> shifted_char_poly(const SubTriple& s, double energy) {
  const int m = static_cast<int>(s.t.rows());
  auto entry = [&](int i, int j) {
    return Quad{s.q(i, j) - (i == j ? energy : 0.0), s.rs(i, j), s.t(i, j)};
  };
  auto term = [&](const std::vector<int>& perm, double sign) {
    std::vector<double> p{sign};
    for (int i = 0; i < m; ++i) p = conv(p, entry(i, perm[i]));
    return p;
  };
  std::vector<std::vector<double>> terms;
  if (m == 1) {
    terms.push_back(term({0}, 1.0));
  } else if (m == 2) {
    terms.push_back(term({0, 1}, 1.0));
    terms.push_back(term({1, 0}, -1.0));
  } else {
    terms.push_back(term({0, 1, 2}, 1.0));
    terms.push_back(term({1, 2, 0}, 1.0));
    terms.push_back(term({2, 0, 1}, 1.0));
    terms.push_back(term({2, 1, 0}, -1.0));
    terms.push_back(term({1, 0, 2}, -1.0));
    terms.push_back(term({0, 2, 1}, -1.0));
  }
  std::vector<double> out(2 * m + 1, 0.0);
  for (const auto& t : terms)
    for (std::size_t i = 0; i < out.size() && i < t.size(); ++i) out[i] += t[i];
  return out;
}

struct Section {
  double measure = 0.0;
  bool tangency = false;
};

/// Lebesgue measure in zeta of {branches below energy}, multiplicity
/// included: real roots of the shifted characteristic polynomial cut the line
/// into intervals on which the below-count is constant.
Section section_measure(const SubTriple& s, double energy) {
  Section out;
  if (s.t.rows() == 1) {
    // t z^2 + rs z + (q - E): width of the sub-level interval in closed form.
    const double t = s.t(0, 0), b = 0.5 * s.rs(0, 0), c = s.q(0, 0) - energy;
    const double disc = b * b - t * c;
    const double scale = b * b + std::abs(t * c) + 1e-300;
    out.tangency = std::abs(disc) < 1e-10 * scale;
    if (disc > 0.0) out.measure = 2.0 * std::sqrt(disc) / t;
    return out;
  }
  const auto poly = shifted_char_poly(s, energy);
  const auto roots = detail::poly_roots(poly);
  std::vector<double> cuts;
  for (const auto& z : roots)
    if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z))) cuts.push_back(z.real());
  if (cuts.size() < 2) return out;
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len < 1e-9 * (1.0 + std::abs(cuts[i]))) {
      out.tangency = true;
      continue;
    }
    const int weight = count_below(s, 0.5 * (cuts[i] + cuts[i + 1]), energy);
    out.measure += weight * len;
  }
  return out;
}

/// Depth breakpoints: surface, interface, and every knot of every profile in
/// between. Integration proceeds per interval so kinks of the coefficients
/// never sit inside a panel.
std::vector<double> depth_breakpoints(const MaterialModel& model) {
  std::set<double> zs{0.0, model.z_i()};
  for (const auto& prof : model.profiles())
    for (const auto& knot : prof.knots())
      if (knot.z > model.z_i() && knot.z < 0.0) zs.insert(knot.z);
  return {zs.rbegin(), zs.rend()};  // descending from 0
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

}  // namespace

Eigen::VectorXd branch_functions(const AcousticTriple& a, double zeta, Family family) {
  const auto keep = family_components(family);
  if (static_cast<int>(keep.size()) != 3) check_decoupling(a, keep);
  SubTriple s;
  s.t = sub_block(a.t, keep);
  const Eigen::MatrixXd r = sub_block(a.r, keep);
  s.rs = r + r.transpose();
  s.q = sub_block(a.q, keep);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(symbol_at(s, zeta),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues();
}

PhaseSpaceVolume phase_space_volume(const MaterialModel& model, const Vector2d& x,
                                    const Vector2d& xi_hat, double energy,
                                    Family family, const VolumeOptions& opts) {
  const double floor = symbol_floor(model, x, xi_hat, family);
  if (!(energy < floor))
    throw OutOfDomainError(
        "energy must lie below the symbol floor of the constant tail");
  PhaseSpaceVolume out;
  if (energy <= 0.0) return out;
  const auto keep = family_components(family);
  auto measure = [&](double z) {
    const AcousticTriple a = acoustic_triple(model, x, xi_hat, z);
    Section s;
    if (static_cast<int>(keep.size()) == 3 && decouples(a)) {
      // Coincident scalar and sagittal crossings would turn into double
      // roots of the degree-six resolvent; the split blocks keep them exact.
      const Section sc = section_measure(sub_triple(a, {1}), energy);
      const Section sg = section_measure(sub_triple(a, {0, 2}), energy);
      s.measure = sc.measure + sg.measure;
      s.tangency = sc.tangency || sg.tangency;
    } else {
      s = section_measure(sub_triple(a, keep), energy);
    }
    out.branch_tangency |= s.tangency;
    ++out.evaluations;
    return s.measure;
  };
  const auto breaks = depth_breakpoints(model);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double hi = breaks[i], lo = breaks[i + 1];
    if (model.interpolation() == Interpolation::step &&
        model.laterally_homogeneous()) {
      out.value += measure(0.5 * (hi + lo)) * (hi - lo);
      continue;
    }
    const double fa = measure(lo), fm = measure(0.5 * (hi + lo)), fb = measure(hi);
    const double tol = opts.rel_tol * std::max(1.0, std::abs(fm) * (hi - lo));
    out.value +=
        adaptive_simpson(measure, lo, hi, fa, fm, fb, tol, opts.max_refine);
  }
  return out;
}

MonteCarloVolume phase_space_volume_mc(const MaterialModel& model, const Vector2d& x,
                                       const Vector2d& xi_hat, double energy,
                                       Family family, std::size_t samples,
                                       std::uint64_t seed) {
  const double floor = symbol_floor(model, x, xi_hat, family);
  if (!(energy < floor))
    throw OutOfDomainError(
        "energy must lie below the symbol floor of the constant tail");
  MonteCarloVolume out;
  out.samples = samples;
  if (energy <= 0.0 || samples == 0) return out;
  const auto keep = family_components(family);

  // Enclosing zeta box from a conservative symbol lower bound over depth.
  const auto breaks = depth_breakpoints(model);
  double tmin = std::numeric_limits<double>::infinity();
  double rsn = 0.0;
  auto account = [&](double z) {
    const SubTriple s = sub_triple(acoustic_triple(model, x, xi_hat, z), keep);
    tmin = std::min(tmin, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                              s.t, Eigen::EigenvaluesOnly)
                              .eigenvalues()(0));
    rsn = std::max(rsn, s.rs.norm());
  };
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    account(breaks[i]);
    if (i + 1 < breaks.size()) account(0.5 * (breaks[i] + breaks[i + 1]));
  }
  const double zeta_box =
      (rsn + std::sqrt(rsn * rsn + 4.0 * tmin * energy)) / (2.0 * tmin) + 0.5;
  const double z_lo = model.z_i();
  const double box_area = -z_lo * 2.0 * zeta_box;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(z_lo, 0.0);
  std::uniform_real_distribution<double> uzeta(-zeta_box, zeta_box);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = uz(rng);
    const double zeta = uzeta(rng);
    const SubTriple s = sub_triple(acoustic_triple(model, x, xi_hat, z), keep);
    const double w = static_cast<double>(count_below(s, zeta, energy));
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  out.value = box_area * mean;
  out.std_error = box_area * std::sqrt(var / n);
  return out;
}

WeylCheck weyl_check(const MaterialModel& model, const Vector2d& x,
                     const Vector2d& xi_hat, double energy, Family family,
                     const std::vector<double>& k_list, const DepthGrid* grid,
                     const VolumeOptions& opts) {
  WeylCheck out;
  out.volume = phase_space_volume(model, x, xi_hat, energy, family, opts);
  for (double k : k_list) {
    WeylRow row;
    row.k = k;
    row.counted = counting_function(model, x, k * xi_hat, energy, family, grid);
    row.predicted = k * out.volume.value / (2.0 * M_PI);
    row.rel_error =
        std::abs(row.counted - row.predicted) / std::max(1.0, row.predicted);
    out.rows.push_back(row);
  }
  const std::size_t n = out.rows.size();
  out.improving = n >= 3 && out.rows[n - 3].rel_error > out.rows[n - 2].rel_error &&
                  out.rows[n - 2].rel_error > out.rows[n - 1].rel_error;
  return out;
}

}  // namespace esw
