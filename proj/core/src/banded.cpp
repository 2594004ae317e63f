#include "banded.hpp"

#include <algorithm>
#include <random>
#include <string>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "esw/errors.hpp"

namespace esw::detail {

Eigen::MatrixXcd BandedHermitian::to_dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i <= std::min(n - 1, j + kd); ++i) {
      const std::complex<double> v =
          ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (kd + 1)];
      m(i, j) = v;
      if (i != j) m(j, i) = std::conj(v);
    }
  }
  return m;
}

namespace {

void check_info(lapack_int info, int n, const char* routine) {
  if (info == 0) return;
  if (info > n)
    throw ConvergenceError(std::string(routine) +
                           ": mass matrix is not positive definite");
  throw ConvergenceError(std::string(routine) + ": info=" + std::to_string(info));
}

}  // namespace

Eigen::VectorXd banded_eigenvalues(BandedHermitian a, BandedHermitian b) {
  const int n = a.n, kd = a.kd;
  Eigen::VectorXd w(n);
  std::vector<std::complex<double>> z(1);
  const lapack_int info = LAPACKE_zhbgv(
      LAPACK_COL_MAJOR, 'N', 'L', n, kd, b.kd, a.ab.data(), kd + 1, b.ab.data(),
      b.kd + 1, w.data(), z.data(), 1);
  check_info(info, n, "zhbgv");
  return w;
}

namespace {

// Factor A - sigma B in general-band storage. A and B may carry different
// bandwidths. Returns the zgbtrf info code so the caller can nudge sigma off
// an exactly singular shift.
lapack_int shifted_factor(const BandedHermitian& a, const BandedHermitian& b,
                          double sigma, std::vector<std::complex<double>>& ab,
                          std::vector<lapack_int>& ipiv) {
  const int n = a.n, kd = std::max(a.kd, b.kd), ldab = 3 * kd + 1;
  std::fill(ab.begin(), ab.end(), std::complex<double>(0.0, 0.0));
  for (int j = 0; j < n; ++j) {
    for (int i = j; i <= std::min(n - 1, j + kd); ++i) {
      std::complex<double> v(0.0, 0.0);
      if (i - j <= a.kd)
        v = a.ab[static_cast<std::size_t>(i - j) +
                 static_cast<std::size_t>(j) * (a.kd + 1)];
      if (i - j <= b.kd)
        v -= sigma * b.ab[static_cast<std::size_t>(i - j) +
                          static_cast<std::size_t>(j) * (b.kd + 1)];
      ab[static_cast<std::size_t>(2 * kd + i - j) +
         static_cast<std::size_t>(j) * ldab] = v;
      if (i != j)
        ab[static_cast<std::size_t>(2 * kd + j - i) +
           static_cast<std::size_t>(i) * ldab] = std::conj(v);
    }
  }
  return LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, ab.data(), ldab,
                        ipiv.data());
}

}  // namespace

// The all-in-one banded driver accumulates the full n x n band-reduction
// transform as soon as eigenvectors are requested, which is cubic in n no
// matter how few pairs lie in the window. Eigenvalues are therefore computed
// with the values-only driver and each requested vector is recovered by
// inverse iteration on the shifted band factorization, with Gram-Schmidt in
// the mass inner product across near-degenerate clusters.
BandedEigenResult banded_eigenpairs_range(BandedHermitian a, BandedHermitian b,
                                          double vl, double vu) {
  const int n = a.n, kd = a.kd;
  BandedEigenResult res;
  res.values = banded_eigenvalues_range(a, b, vl, vu);
  const int m = static_cast<int>(res.values.size());
  res.vectors = Eigen::MatrixXcd::Zero(n, m);
  if (m == 0) return res;

  double scale = 0.0;
  for (const std::complex<double>& v : a.ab) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1.0);

  const int kmax = std::max(kd, b.kd);
  const int ldab = 3 * kmax + 1;
  std::vector<std::complex<double>> ab(static_cast<std::size_t>(ldab) * n);
  std::vector<lapack_int> ipiv(n);
  std::mt19937_64 rng(0x243f6a8885a308d3ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int j = 0; j < m; ++j) {
    double sigma = res.values(j);
    lapack_int info = shifted_factor(a, b, sigma, ab, ipiv);
    for (double nudge = 1e-12; info > 0 && nudge <= 1e-8; nudge *= 100.0) {
      sigma = res.values(j) + nudge * scale;
      info = shifted_factor(a, b, sigma, ab, ipiv);
    }
    check_info(info, n, "zgbtrf");

    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x(i) = std::complex<double>(unit(rng), unit(rng));
    x /= x.norm();

    const double cluster = 1e-8 * std::max(std::abs(res.values(j)), scale);
    Eigen::VectorXcd y;
    for (int pass = 0; pass < 6; ++pass) {
      y = banded_apply(b, x);
      info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kmax, kmax, 1, ab.data(),
                            ldab, ipiv.data(), y.data(), n);
      check_info(info, n, "zgbtrs");
      for (int p = 0; p < j; ++p) {
        if (std::abs(res.values(p) - res.values(j)) > cluster) continue;
        y -= res.vectors.col(p) * res.vectors.col(p).dot(banded_apply(b, y));
      }
      const Eigen::VectorXcd by = banded_apply(b, y);
      y /= std::sqrt(std::real(y.dot(by)));
      const double resid =
          (banded_apply(a, y) - res.values(j) * banded_apply(b, y)).norm();
      x = y;
      if (pass >= 1 && resid <= 1e-10 * scale) break;
    }
    res.vectors.col(j) = y;
  }
  return res;
}

Eigen::VectorXd banded_eigenvalues_range(BandedHermitian a, BandedHermitian b,
                                         double vl, double vu) {
  const int n = a.n, kd = a.kd;
  Eigen::VectorXd w(n);
  std::vector<std::complex<double>> q(1), z(1);
  std::vector<lapack_int> ifail(n);
  lapack_int m = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_zhbgvx(
      LAPACK_COL_MAJOR, 'N', 'V', 'L', n, kd, b.kd, a.ab.data(), kd + 1,
      b.ab.data(), b.kd + 1, q.data(), 1, vl, vu, 0, 0, abstol, &m, w.data(),
      z.data(), 1, ifail.data());
  check_info(info, n, "zhbgvx");
  return w.head(m);
}

Eigen::VectorXcd banded_apply(const BandedHermitian& a, const Eigen::VectorXcd& x) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(a.n);
  for (int j = 0; j < a.n; ++j) {
    const int top = std::min(a.n - 1, j + a.kd);
    for (int i = j; i <= top; ++i) {
      const std::complex<double> v =
          a.ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (a.kd + 1)];
      y(i) += v * x(j);
      if (i != j) y(j) += std::conj(v) * x(i);
    }
  }
  return y;
}

}  // namespace esw::detail
