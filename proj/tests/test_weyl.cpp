#include <doctest.h>

#include <cmath>
#include <vector>

#include "esw/errors.hpp"
#include "esw/spectrum.hpp"
#include "esw/weyl.hpp"
#include "oracles.hpp"

using namespace esw;

namespace {

const Eigen::Vector2d kOrigin = Eigen::Vector2d::Zero();

MaterialModel love_pair() {
  std::vector<DepthKnot> knots{{0.0, VoigtMatrix::isotropic(1.0, 1.0)},
                               {-1.0, VoigtMatrix::isotropic(1.0, 4.0)}};
  return MaterialModel::stratified(Symmetry::isotropic, Interpolation::step, -1.0,
                                   std::move(knots));
}

VoigtMatrix monoclinic_sample() {
  VoigtMatrix c = VoigtMatrix::isotropic(2.0, 1.0);
  c(0, 4) = c(4, 0) = 0.3;
  c(1, 4) = c(4, 1) = 0.2;
  c(2, 4) = c(4, 2) = 0.15;
  c(3, 5) = c(5, 3) = 0.25;
  return c;
}

}  // namespace

TEST_CASE("frozen-depth branch values of an isotropic material") {
  const AcousticTriple a =
      acoustic_triple(VoigtMatrix::isotropic(2.0, 1.0), {1.0, 0.0});
  const Eigen::VectorXd full = branch_functions(a, 1.0, Family::full);
  REQUIRE(full.size() == 3);
  CHECK(full(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(full(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(full(2) == doctest::Approx(8.0).epsilon(1e-12));

  const Eigen::VectorXd love = branch_functions(a, 1.0, Family::love);
  REQUIRE(love.size() == 1);
  CHECK(love(0) == doctest::Approx(2.0).epsilon(1e-12));

  const Eigen::VectorXd ray = branch_functions(a, 1.0, Family::rayleigh);
  REQUIRE(ray.size() == 2);
  CHECK(ray(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ray(1) == doctest::Approx(8.0).epsilon(1e-12));

  // Ascending in zeta^2 along each branch.
  CHECK(branch_functions(a, 2.0, Family::love)(0) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("phase-space area of a step waveguide in closed form") {
  MaterialModel m = love_pair();

  SUBCASE("below the well there is no area") {
    CHECK(phase_space_volume(m, kOrigin, {1.0, 0.0}, 0.5, Family::love).value ==
          doctest::Approx(0.0));
  }
  SUBCASE("scalar family") {
    for (double e : {1.5, 2.0, 3.0, 3.9}) {
      const double ref = oracle::love_section_width(1.0, e);  // layer depth 1
      const PhaseSpaceVolume got =
          phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::love);
      CHECK(got.value == doctest::Approx(ref).epsilon(1e-9));
      CHECK(got.evaluations > 0);
    }
  }
  SUBCASE("families add up to the full area") {
    const double e = 3.4;
    const double lv =
        phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::love).value;
    const double ry =
        phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::rayleigh).value;
    const double full =
        phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::full).value;
    CHECK(full == doctest::Approx(lv + ry).epsilon(1e-9));
    // Both sagittal branches: slow one doubles the scalar width, fast one
    // (modulus 3) opens above e = 3.
    const double ref = oracle::love_section_width(1.0, e) +
                       oracle::love_section_width(3.0, e);
    CHECK(ry == doctest::Approx(ref).epsilon(1e-9));
  }
  SUBCASE("energy at or above the tail floor is rejected") {
    CHECK_THROWS_AS(phase_space_volume(m, kOrigin, {1.0, 0.0}, 4.0, Family::love),
                    OutOfDomainError);
    CHECK_THROWS_AS(phase_space_volume(m, kOrigin, {1.0, 0.0}, 5.0, Family::full),
                    OutOfDomainError);
  }
}

TEST_CASE("adaptive depth quadrature handles a graded profile") {
  // Shear modulus grows linearly from 1 at the surface to 2 at depth -1.
  std::vector<DepthKnot> knots{{0.0, VoigtMatrix::isotropic(1.0, 1.0)},
                               {-1.0, VoigtMatrix::isotropic(1.0, 2.0)}};
  MaterialModel m = MaterialModel::stratified(Symmetry::isotropic,
                                              Interpolation::linear, -1.0, knots);
  const double e = 1.8;

  // Independent quadrature: mu(z) = 1 - z, width 2 sqrt(e/mu - 1) down to the
  // turning depth z = 1 - e, regularized by the substitution z = z_t + u^2 d.
  const double z_turn = 1.0 - e;
  const double d = -z_turn;
  auto integrand = [&](double u) {
    const double z = z_turn + u * u * d;
    const double mu = 1.0 - z;
    const double w = mu < e ? 2.0 * std::sqrt(e / mu - 1.0) : 0.0;
    return w * 2.0 * u * d;
  };
  const int n = 4000;
  double ref = 0.0;  // composite Simpson on u in [0, 1]
  for (int i = 0; i < n; i += 2) {
    const double u0 = static_cast<double>(i) / n;
    const double u1 = static_cast<double>(i + 1) / n;
    const double u2 = static_cast<double>(i + 2) / n;
    ref += (integrand(u0) + 4.0 * integrand(u1) + integrand(u2)) * (u2 - u0) / 6.0;
  }

  const PhaseSpaceVolume got =
      phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::love);
  CHECK(got.value == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("monte carlo estimate brackets the exact area") {
  MaterialModel m = love_pair();
  const double e = 3.0;
  const double exact =
      phase_space_volume(m, kOrigin, {1.0, 0.0}, e, Family::love).value;
  const MonteCarloVolume mc =
      phase_space_volume_mc(m, kOrigin, {1.0, 0.0}, e, Family::love, 200000, 42);
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error + 1e-12);

  const MonteCarloVolume again =
      phase_space_volume_mc(m, kOrigin, {1.0, 0.0}, e, Family::love, 200000, 42);
  CHECK(again.value == mc.value);  // deterministic for a fixed seed
}

TEST_CASE("monoclinic scalar admissible bound carries the coupling correction") {
  const VoigtMatrix c = monoclinic_sample();
  VoigtMatrix tail = c;
  tail.matrix() *= 2.5;
  std::vector<DepthKnot> knots{{0.0, c}, {-1.0, tail}};
  MaterialModel m = MaterialModel::stratified(Symmetry::monoclinic_x2z,
                                              Interpolation::step, -1.0, knots);
  REQUIRE(m.validate().ok);

  // Scalar family floor of the tail: q - r^2/t with t = 2.5, r = 0.625,
  // q = 2.5, hence 2.5 - 0.15625.
  CHECK(symbol_floor(m, kOrigin, {1.0, 0.0}, Family::love) ==
        doctest::Approx(2.34375).epsilon(1e-12));

  const double e_love = 2.0;
  const double exact =
      phase_space_volume(m, kOrigin, {1.0, 0.0}, e_love, Family::love).value;
  const MonteCarloVolume mc = phase_space_volume_mc(m, kOrigin, {1.0, 0.0},
                                                    e_love, Family::love,
                                                    200000, 7);
  CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error + 1e-12);

  // Full family goes through the degree-six section polynomial.
  const double floor_full = symbol_floor(m, kOrigin, {1.0, 0.0}, Family::full);
  const double e_full = 0.9 * floor_full;
  const double exact_full =
      phase_space_volume(m, kOrigin, {1.0, 0.0}, e_full, Family::full).value;
  const MonteCarloVolume mc_full = phase_space_volume_mc(
      m, kOrigin, {1.0, 0.0}, e_full, Family::full, 200000, 11);
  CHECK(exact_full > 0.0);
  CHECK(std::abs(mc_full.value - exact_full) <= 4.0 * mc_full.std_error + 1e-12);
}

TEST_CASE("eigenvalue counts approach the phase-space prediction") {
  MaterialModel m = love_pair();
  const double e = 3.0;
  const WeylCheck chk =
      weyl_check(m, kOrigin, {1.0, 0.0}, e, Family::love, {10.0, 30.0, 100.0});
  REQUIRE(chk.rows.size() == 3);
  CHECK(chk.volume.value == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
  for (const auto& row : chk.rows) {
    CHECK(row.predicted == doctest::Approx(row.k * chk.volume.value /
                                           (2.0 * M_PI)).epsilon(1e-12));
    CHECK(row.counted > 0);
  }
  CHECK(chk.improving);
  CHECK(chk.rows.back().rel_error < 0.05);

  CHECK_THROWS_AS(
      weyl_check(m, kOrigin, {1.0, 0.0}, 4.2, Family::love, {10.0}),
      OutOfDomainError);
}
