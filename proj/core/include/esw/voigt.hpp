#pragma once

#include <Eigen/Dense>

namespace esw {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Material symmetry classes accepted by the model format. The monoclinic
/// class has its mirror plane spanned by x2 and the depth axis, with waves
/// propagating along x1.
enum class Symmetry { isotropic, transversely_isotropic, monoclinic_x2z, general };

/// Voigt pair index: (11,22,33,23,13,12) -> 0..5, no factor-of-two scaling
/// on shear entries.
constexpr int voigt_index(int i, int j) {
  if (i == j) return i;
  return 6 - i - j;  // (1,2)->3, (0,2)->4, (0,1)->5
}

/// Density-normalized stiffness in Voigt form. Entries carry velocity^2
/// units; the full tensor is recovered through c(i,j,k,l).
class VoigtMatrix {
 public:
  VoigtMatrix() : m_(Matrix6::Zero()) {}
  explicit VoigtMatrix(const Matrix6& m) : m_(m) {}

  static VoigtMatrix isotropic(double lambda, double mu);

  /// Five-constant form, symmetry axis along depth. c12 is implied by
  /// c12 = c11 - 2 c66.
  static VoigtMatrix transversely_isotropic(double c11, double c33, double c44,
                                            double c66, double c13);

  const Matrix6& matrix() const { return m_; }
  Matrix6& matrix() { return m_; }

  double operator()(int a, int b) const { return m_(a, b); }
  double& operator()(int a, int b) { return m_(a, b); }

  /// Tensor component C_ijkl / rho via the Voigt map.
  double c(int i, int j, int k, int l) const {
    return m_(voigt_index(i, j), voigt_index(k, l));
  }

  /// Smallest eigenvalue of the 6x6 matrix; positive iff the stiffness is
  /// strongly convex.
  double min_eigenvalue() const;

  /// Max diagonal entry, used to scale the convexity margin.
  double max_diagonal() const { return m_.diagonal().maxCoeff(); }

  bool is_symmetric(double tol) const {
    return (m_ - m_.transpose()).cwiseAbs().maxCoeff() <= tol;
  }

  /// Largest |entry| that the declared symmetry requires to vanish.
  double pattern_violation(Symmetry sym) const;

  bool operator==(const VoigtMatrix& o) const { return m_ == o.m_; }

 private:
  Matrix6 m_;
};

}  // namespace esw
