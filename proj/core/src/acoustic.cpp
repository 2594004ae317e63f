#include "esw/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esw/errors.hpp"

namespace esw {

AcousticTriple acoustic_triple(const VoigtMatrix& c, const Vector2d& xi_hat) {
  AcousticTriple a;
  for (int i = 0; i < 3; ++i) {
    for (int l = 0; l < 3; ++l) {
      a.t(i, l) = c.c(i, 2, 2, l);
      double r = 0.0, q = 0.0;
      for (int j = 0; j < 2; ++j) {
        r += c.c(i, j, 2, l) * xi_hat(j);
        for (int k = 0; k < 2; ++k) q += c.c(i, j, k, l) * xi_hat(j) * xi_hat(k);
      }
      a.r(i, l) = r;
      a.q(i, l) = q;
    }
  }
  return a;
}

AcousticTriple acoustic_triple(const MaterialModel& model, const Vector2d& x,
                               const Vector2d& xi_hat, double z) {
  return acoustic_triple(model.evaluate(x, z), xi_hat);
}

AcousticTriple rotated_triple(const AcousticTriple& base, double rho, double v) {
  const double c = std::cos(rho), s = std::sin(rho), v2 = v * v;
  const Matrix3d rsym = base.r + base.r.transpose();
  AcousticTriple out;
  out.q = c * c * base.q + c * s * rsym + s * s * base.t;
  out.t = s * s * base.q - c * s * rsym + c * c * base.t;
  out.r = -c * s * base.q + c * c * base.r - s * s * base.r.transpose() +
          c * s * base.t;
  out.q -= v2 * c * c * Matrix3d::Identity();
  out.t -= v2 * s * s * Matrix3d::Identity();
  out.r += v2 * c * s * Matrix3d::Identity();
  return out;
}

// ---------------------------------------------------------------------------
// Sextic

namespace {

using Quad = std::array<double, 3>;   // entry polynomial in zeta
using Sext = std::array<double, 7>;

Sext conv3(const Quad& a, const Quad& b, const Quad& c) {
  std::array<double, 5> ab{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ab[i + j] += a[i] * b[j];
  Sext out{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) out[i + j] += ab[i] * c[j];
  return out;
}

std::complex<double> horner(const Sext& p, std::complex<double> z, int deg) {
  std::complex<double> v = p[deg];
  for (int i = deg - 1; i >= 0; --i) v = v * z + p[i];
  return v;
}

std::complex<double> horner_deriv(const Sext& p, std::complex<double> z, int deg) {
  std::complex<double> v = p[deg] * double(deg);
  for (int i = deg - 1; i >= 1; --i) v = v * z + p[i] * double(i);
  return v;
}

}  // namespace

SexticProblem sextic(const AcousticTriple& triple, double v) {
  const Matrix3d b = triple.r + triple.r.transpose();
  const Matrix3d q = triple.q - v * v * Matrix3d::Identity();
  auto entry = [&](int i, int l) {
    return Quad{q(i, l), b(i, l), triple.t(i, l)};
  };

  SexticProblem sx;
  sx.coeff.fill(0.0);
  const int perm[6][4] = {{0, 1, 2, +1}, {1, 2, 0, +1}, {2, 0, 1, +1},
                          {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};
  for (const auto& p : perm) {
    const Sext term = conv3(entry(0, p[0]), entry(1, p[1]), entry(2, p[2]));
    for (int i = 0; i < 7; ++i) sx.coeff[i] += p[3] * term[i];
  }

  // Leading coefficient is det t, positive for strongly convex stiffness.
  const double lead = sx.coeff[6];
  if (!(std::abs(lead) > 0.0))
    throw DegenerateRootsError("sextic leading coefficient vanished");

  Eigen::Matrix<double, 6, 6> comp = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 1; i < 6; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < 6; ++i) comp(i, 5) = -sx.coeff[i] / lead;
  Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(comp);

  std::array<std::complex<double>, 6> roots;
  for (int i = 0; i < 6; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    const std::complex<double> pz = horner(sx.coeff, z, 6);
    const std::complex<double> dpz = horner_deriv(sx.coeff, z, 6);
    if (std::abs(dpz) > 0.0) {
      const std::complex<double> step = pz / dpz;
      if (std::abs(step) < 0.1 * (1.0 + std::abs(z))) z -= step;
    }
    roots[i] = z;
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  for (int i = 0; i < 6; ++i) sx.roots(i) = roots[i];
  return sx;
}

std::array<std::complex<double>, 3> lower_roots(const SexticProblem& sx,
                                                double axis_tol) {
  double scale = 1.0;
  for (int i = 0; i < 6; ++i) scale = std::max(scale, std::abs(sx.roots(i)));
  int n_lower = 0;
  for (int i = 0; i < 6; ++i) {
    if (std::abs(sx.roots(i).imag()) < axis_tol * scale)
      throw DegenerateRootsError(
          "sextic root too close to the real axis; speed at or above the "
          "limiting velocity");
    if (sx.roots(i).imag() < 0.0) ++n_lower;
  }
  if (n_lower != 3)
    throw DegenerateRootsError("expected three depth-decaying sextic roots");
  return {sx.roots(0), sx.roots(1), sx.roots(2)};
}

// ---------------------------------------------------------------------------
// Limiting velocity

namespace {

double det_q(const AcousticTriple& base, double rho, double v) {
  return rotated_triple(base, rho, v).q.determinant();
}

// Minimum over rho of det q(rho; v): dense scan plus golden-section
// refinement around the grid minimizer.
double min_det_over_rho(const AcousticTriple& base, double v, int n_rho,
                        double* rho_min = nullptr) {
  const double pi = 3.14159265358979323846;
  double best = std::numeric_limits<double>::infinity();
  double best_rho = 0.0;
  for (int i = 0; i < n_rho; ++i) {
    const double rho = -0.5 * pi + pi * i / (n_rho - 1);
    const double d = det_q(base, rho, v);
    if (d < best) {
      best = d;
      best_rho = rho;
    }
  }
  const double h = pi / (n_rho - 1);
  double a = best_rho - h, b = best_rho + h;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = det_q(base, x1, v), f2 = det_q(base, x2, v);
  for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = det_q(base, x1, v);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = det_q(base, x2, v);
    }
  }
  const double rho = 0.5 * (a + b);
  const double d = det_q(base, rho, v);
  if (rho_min) *rho_min = rho;
  return std::min(d, best);
}

}  // namespace

LimitingVelocityResult limiting_velocity(const AcousticTriple& base,
                                         const LimitingVelocityOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(base.q, Eigen::EigenvaluesOnly);
  const double qmin = es.eigenvalues()(0);
  if (!(qmin > 0.0)) throw ConvergenceError("q(xi_hat) is not positive definite");

  // det q(0; v) = 0 exactly at v^2 = min eig q, so v_L <= sqrt(qmin).
  double lo = 0.0, hi = std::sqrt(qmin);
  if (min_det_over_rho(base, hi, opts.n_rho) > 0.0) hi *= 1.0 + 1e-12;

  LimitingVelocityResult res;
  while ((hi - lo) > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (min_det_over_rho(base, mid, opts.n_rho) <= 0.0)
      hi = mid;
    else
      lo = mid;
    ++res.bisection_steps;
    if (res.bisection_steps > 200) break;
  }
  res.v_l = hi;

  // All angles where the determinant reaches (near) zero at v_L.
  const double pi = 3.14159265358979323846;
  const double scale = std::abs(base.q.determinant()) + std::abs(base.t.determinant());
  const double h = pi / (opts.n_rho - 1);
  for (int i = 0; i < opts.n_rho; ++i) {
    const double rho = -0.5 * pi + h * i;
    const double d0 = det_q(base, rho, res.v_l);
    const bool local_min =
        d0 <= det_q(base, rho - h, res.v_l) && d0 <= det_q(base, rho + h, res.v_l);
    if (!local_min) continue;
    double a = rho - h, b = rho + h;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = det_q(base, x1, res.v_l), f2 = det_q(base, x2, res.v_l);
    for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
      if (f1 < f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - gr * (b - a);
        f1 = det_q(base, x1, res.v_l);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + gr * (b - a);
        f2 = det_q(base, x2, res.v_l);
      }
    }
    const double rho_ref = 0.5 * (a + b);
    if (std::abs(det_q(base, rho_ref, res.v_l)) < 1e-6 * scale) {
      bool dup = false;
      for (double r : res.minimizing_angles)
        if (std::abs(r - rho_ref) < 1e-3) dup = true;
      if (!dup) res.minimizing_angles.push_back(rho_ref);
    }
  }
  return res;
}

LimitingVelocityResult limiting_velocity(const MaterialModel& model,
                                         const Vector2d& x, const Vector2d& xi_hat,
                                         double z,
                                         const LimitingVelocityOptions& opts) {
  return limiting_velocity(acoustic_triple(model, x, xi_hat, z), opts);
}

InfimumVelocityResult infimum_limiting_velocity(const MaterialModel& model,
                                                const Vector2d& x,
                                                const Vector2d& xi_hat,
                                                const LimitingVelocityOptions& opts) {
  // Candidate depths: knots of every contributing profile plus interval
  // midpoints, clipped to [Z_I, 0]; the tail below Z_I is constant.
  std::vector<double> depths{0.0, model.z_i()};
  for (const auto& prof : model.profiles())
    for (const auto& k : prof.knots())
      if (k.z >= model.z_i()) depths.push_back(k.z);
  std::sort(depths.begin(), depths.end(), std::greater<double>());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  std::vector<double> samples = depths;
  for (std::size_t i = 1; i < depths.size(); ++i)
    samples.push_back(0.5 * (depths[i - 1] + depths[i]));
  std::sort(samples.begin(), samples.end(), std::greater<double>());

  InfimumVelocityResult res;
  res.v_inf = std::numeric_limits<double>::infinity();
  for (double z : samples) {
    const double vl = limiting_velocity(model, x, xi_hat, z, opts).v_l;
    if (z == 0.0) res.v_l_surface = vl;
    if (z == model.z_i()) res.v_l_interface = vl;
    if (vl < res.v_inf * (1.0 - 10.0 * opts.rel_tol)) {
      res.v_inf = vl;
      res.z_at_min = z;
    }
  }
  res.decreasing_with_depth =
      res.v_inf < res.v_l_interface * (1.0 - 10.0 * opts.rel_tol);
  res.minimum_at_surface = res.v_l_surface <= res.v_inf * (1.0 + 10.0 * opts.rel_tol);
  return res;
}

}  // namespace esw
