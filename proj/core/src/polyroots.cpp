#include "polyroots.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace esw::detail {

std::vector<std::complex<double>> poly_roots(std::vector<double> c) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return {};
  while (c.size() > 1 && std::abs(c.back()) < 1e-14 * scale) c.pop_back();
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  std::vector<std::complex<double>> roots(deg);
  auto horner = [&](std::complex<double> z, std::complex<double>& p,
                    std::complex<double>& dp) {
    p = c[deg];
    dp = 0.0;
    for (int i = deg - 1; i >= 0; --i) {
      dp = dp * z + p;
      p = p * z + c[i];
    }
  };
  for (int i = 0; i < deg; ++i) {
    std::complex<double> z = es.eigenvalues()(i);
    std::complex<double> p, dp;
    horner(z, p, dp);
    if (std::abs(dp) > 0.0) {
      const std::complex<double> step = p / dp;
      if (std::abs(step) < 0.1 * (1.0 + std::abs(z))) z -= step;
    }
    roots[i] = z;
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return roots;
}

}  // namespace esw::detail
