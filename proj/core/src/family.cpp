#include "family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esw/errors.hpp"

namespace esw::detail {

std::vector<int> family_components(Family f) {
  switch (f) {
    case Family::love:
      return {1};
    case Family::rayleigh:
      return {0, 2};
    default:
      return {0, 1, 2};
  }
}

namespace {

bool separates(const AcousticTriple& a, const std::vector<int>& keep) {
  double scale = 0.0;
  for (int i = 0; i < 3; ++i)
    scale = std::max({scale, std::abs(a.t(i, i)), std::abs(a.q(i, i))});
  double leak = 0.0;
  for (int i : keep)
    for (int j = 0; j < 3; ++j) {
      if (std::find(keep.begin(), keep.end(), j) != keep.end()) continue;
      leak = std::max({leak, std::abs(a.t(i, j)), std::abs(a.t(j, i)),
                       std::abs(a.r(i, j)), std::abs(a.r(j, i)),
                       std::abs(a.q(i, j)), std::abs(a.q(j, i))});
    }
  return leak <= 1e-9 * scale;
}

}  // namespace

void check_decoupling(const AcousticTriple& a, const std::vector<int>& keep) {
  if (!separates(a, keep))
    throw SymmetryMismatchError(
        "requested decoupled family does not separate for this model");
}

bool decouples(const AcousticTriple& a) { return separates(a, {1}); }

Eigen::MatrixXd sub_block(const Eigen::Matrix3d& full, const std::vector<int>& keep) {
  Eigen::MatrixXd out(keep.size(), keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b) out(a, b) = full(keep[a], keep[b]);
  return out;
}

double symbol_floor_of(const Eigen::MatrixXd& t, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& q) {
  if (t.rows() == 1) return q(0, 0) - r(0, 0) * r(0, 0) / t(0, 0);
  const Eigen::MatrixXd rs = r + r.transpose();
  auto lambda_min = [&](double z) {
    Eigen::MatrixXd s = t * z * z + rs * z + q;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly)
        .eigenvalues()(0);
  };
  const double tmin =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  const double qmax =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const double rn = rs.norm();
  const double box =
      (rn + std::sqrt(rn * rn + 4.0 * tmin * std::abs(qmax))) / (2.0 * tmin) + 1.0;
  const int samples = 801;
  double best = std::numeric_limits<double>::infinity();
  double zbest = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double z = -box + 2.0 * box * i / (samples - 1);
    const double v = lambda_min(z);
    if (v < best) {
      best = v;
      zbest = z;
    }
  }
  const double step = 2.0 * box / (samples - 1);
  double lo = zbest - step, hi = zbest + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = lambda_min(c1), f2 = lambda_min(c2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = lambda_min(c1);
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = lambda_min(c2);
    }
  }
  return std::min(best, std::min(f1, f2));
}

}  // namespace esw::detail
