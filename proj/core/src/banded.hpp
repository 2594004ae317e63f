#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace esw::detail {

/// Hermitian matrix in LAPACK lower-band storage: entry (i, j) with
/// j <= i <= min(n-1, j+kd) lives at ab[(i - j) + j*(kd+1)], column-major.
struct BandedHermitian {
  int n = 0;
  int kd = 0;
  std::vector<std::complex<double>> ab;

  BandedHermitian(int n_, int kd_)
      : n(n_), kd(kd_), ab(static_cast<std::size_t>(kd_ + 1) * n_) {}

  std::complex<double>& at(int i, int j) {
    return ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (kd + 1)];
  }
  /// Accumulate into the lower triangle; upper-triangle requests are the
  /// caller's responsibility to mirror via Hermitian symmetry.
  void add(int i, int j, std::complex<double> v) { at(i, j) += v; }

  Eigen::MatrixXcd to_dense() const;
};

struct BandedEigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // one column per eigenvalue; empty if not requested
};

/// All eigenvalues of A x = lambda B x (A Hermitian banded, B Hermitian
/// positive definite banded, equal bandwidth). Inputs are consumed.
Eigen::VectorXd banded_eigenvalues(BandedHermitian a, BandedHermitian b);

/// Eigenpairs with eigenvalues in (vl, vu].
BandedEigenResult banded_eigenpairs_range(BandedHermitian a, BandedHermitian b,
                                          double vl, double vu);

/// Eigenvalues only in (vl, vu]; avoids the n*n workspace of the pair solve.
Eigen::VectorXd banded_eigenvalues_range(BandedHermitian a, BandedHermitian b,
                                         double vl, double vu);

/// y = A x with A in lower-band Hermitian storage.
Eigen::VectorXcd banded_apply(const BandedHermitian& a, const Eigen::VectorXcd& x);

}  // namespace esw::detail
