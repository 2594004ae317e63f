#pragma once

#include <vector>

#include <Eigen/Dense>

#include "esw/acoustic.hpp"
#include "esw/spectrum.hpp"

namespace esw::detail {

/// Component indices of a decoupled family at xi_hat = (1,0): the scalar
/// horizontally polarized problem lives on u2, the sagittal pair on (u1,u3).
std::vector<int> family_components(Family f);

/// Verify that the triple actually block-decouples over the kept components;
/// throws SymmetryMismatchError when coupling terms would be dropped.
void check_decoupling(const AcousticTriple& a, const std::vector<int>& keep);

/// True when the scalar component separates from the sagittal pair.
bool decouples(const AcousticTriple& a);

Eigen::MatrixXd sub_block(const Eigen::Matrix3d& full, const std::vector<int>& keep);

/// Minimum over real vertical wavenumber of the smallest eigenvalue of
/// T z^2 + (R + R^T) z + Q; closed form for scalar blocks, bracketed scan
/// plus golden-section refinement otherwise.
double symbol_floor_of(const Eigen::MatrixXd& t, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& q);

}  // namespace esw::detail
