#pragma once

#include <complex>
#include <vector>

namespace esw::detail {

/// Roots of a real polynomial sum_p c[p] x^p via the balanced companion
/// matrix, one Newton step per root. Leading near-zero coefficients are
/// trimmed relative to the largest coefficient.
std::vector<std::complex<double>> poly_roots(std::vector<double> c);

}  // namespace esw::detail
