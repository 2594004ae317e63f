#include <doctest.h>

#include <Eigen/Dense>

#include "esw/errors.hpp"
#include "esw/model.hpp"

using namespace esw;

namespace {

MaterialModel two_layer_love(double mu1, double mu2, double h) {
  std::vector<DepthKnot> knots{{0.0, VoigtMatrix::isotropic(1.0, mu1)},
                               {-h, VoigtMatrix::isotropic(1.0, mu2)}};
  return MaterialModel::stratified(Symmetry::isotropic, Interpolation::step, -h,
                                   std::move(knots));
}

}  // namespace

TEST_CASE("voigt pair index covers all tensor index pairs") {
  CHECK(voigt_index(0, 0) == 0);
  CHECK(voigt_index(1, 1) == 1);
  CHECK(voigt_index(2, 2) == 2);
  CHECK(voigt_index(1, 2) == 3);
  CHECK(voigt_index(2, 1) == 3);
  CHECK(voigt_index(0, 2) == 4);
  CHECK(voigt_index(2, 0) == 4);
  CHECK(voigt_index(0, 1) == 5);
  CHECK(voigt_index(1, 0) == 5);
}

TEST_CASE("isotropic stiffness has the classical eigenvalues") {
  const double lambda = 2.0, mu = 1.0;
  const VoigtMatrix c = VoigtMatrix::isotropic(lambda, mu);
  Eigen::SelfAdjointEigenSolver<Matrix6> es(c.matrix(), Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues();
  // {mu, mu, mu, 2 mu, 2 mu, 3 lambda + 2 mu} ascending
  CHECK(ev(0) == doctest::Approx(mu));
  CHECK(ev(1) == doctest::Approx(mu));
  CHECK(ev(2) == doctest::Approx(mu));
  CHECK(ev(3) == doctest::Approx(2.0 * mu));
  CHECK(ev(4) == doctest::Approx(2.0 * mu));
  CHECK(ev(5) == doctest::Approx(3.0 * lambda + 2.0 * mu));
  CHECK(c.min_eigenvalue() == doctest::Approx(mu));

  // Tensor components through the Voigt map.
  CHECK(c.c(0, 0, 0, 0) == doctest::Approx(lambda + 2.0 * mu));
  CHECK(c.c(0, 0, 1, 1) == doctest::Approx(lambda));
  CHECK(c.c(0, 1, 0, 1) == doctest::Approx(mu));
  CHECK(c.c(1, 2, 1, 2) == doctest::Approx(mu));
  CHECK(c.c(0, 0, 1, 2) == doctest::Approx(0.0));
}

TEST_CASE("transversely isotropic factory implies C12 and passes its pattern") {
  const VoigtMatrix c = VoigtMatrix::transversely_isotropic(4.0, 3.0, 1.0, 1.2, 1.3);
  CHECK(c.c(0, 0, 1, 1) == doctest::Approx(4.0 - 2.0 * 1.2));
  CHECK(c.c(0, 0, 2, 2) == doctest::Approx(1.3));
  CHECK(c.c(1, 2, 1, 2) == doctest::Approx(1.0));
  CHECK(c.c(0, 1, 0, 1) == doctest::Approx(1.2));
  CHECK(c.is_symmetric(0.0));
  CHECK(c.pattern_violation(Symmetry::transversely_isotropic) == 0.0);
  CHECK(c.pattern_violation(Symmetry::general) == 0.0);
}

TEST_CASE("pattern violation reports the worst forbidden entry") {
  VoigtMatrix c = VoigtMatrix::isotropic(2.0, 1.0);
  CHECK(c.pattern_violation(Symmetry::isotropic) == 0.0);
  c(0, 3) = c(3, 0) = 0.25;  // normal-shear coupling forbidden below monoclinic
  CHECK(c.pattern_violation(Symmetry::transversely_isotropic) ==
        doctest::Approx(0.25));
  CHECK(c.pattern_violation(Symmetry::monoclinic_x2z) == doctest::Approx(0.25));

  VoigtMatrix m = VoigtMatrix::isotropic(2.0, 1.0);
  m(0, 4) = m(4, 0) = 0.5;  // (11)(13) coupling is allowed for monoclinic
  CHECK(m.pattern_violation(Symmetry::monoclinic_x2z) == 0.0);
  CHECK(m.pattern_violation(Symmetry::transversely_isotropic) ==
        doctest::Approx(0.5));
}

TEST_CASE("depth profile interpolation and exact tail") {
  const VoigtMatrix a = VoigtMatrix::isotropic(2.0, 1.0);
  const VoigtMatrix b = VoigtMatrix::isotropic(4.0, 3.0);

  DepthProfile step({{0.0, a}, {-1.0, b}}, Interpolation::step, -1.0);
  CHECK(step.evaluate(0.0) == a);
  CHECK(step.evaluate(-0.5) == a);
  CHECK(step.evaluate(-1.0) == b);
  CHECK(step.evaluate(-7.3) == b);

  DepthProfile lin({{0.0, a}, {-1.0, b}}, Interpolation::linear, -1.0);
  const VoigtMatrix mid = lin.evaluate(-0.5);
  CHECK(mid(0, 0) == doctest::Approx(0.5 * (a(0, 0) + b(0, 0))));
  CHECK(mid(3, 3) == doctest::Approx(0.5 * (a(3, 3) + b(3, 3))));

  // Below the tail depth the deepest knot is returned without arithmetic.
  CHECK(lin.evaluate(-1.0 - 1e-300) == b);
  CHECK(lin.evaluate(-123.0) == b);
}

TEST_CASE("stratified model validates and hashes its content") {
  MaterialModel m = two_layer_love(1.0, 4.0, 1.0);
  const ValidationReport rep = m.validate();
  CHECK(rep.ok);
  CHECK(rep.issues.empty());
  CHECK(rep.min_convexity_eigenvalue > 0.0);
  CHECK(m.laterally_homogeneous());
  CHECK(m.z_i() == -1.0);
  CHECK(m.delta() > 0.0);

  MaterialModel same = two_layer_love(1.0, 4.0, 1.0);
  CHECK(same.content_hash() == m.content_hash());
  MaterialModel other = two_layer_love(1.0, 4.0001, 1.0);
  CHECK(other.content_hash() != m.content_hash());
}

TEST_CASE("validation flags structural defects") {
  const VoigtMatrix c = VoigtMatrix::isotropic(2.0, 1.0);

  SUBCASE("first knot away from the surface") {
    MaterialModel m = MaterialModel::stratified(
        Symmetry::isotropic, Interpolation::step, -1.0, {{-0.1, c}});
    CHECK_FALSE(m.validate().ok);
  }
  SUBCASE("knots out of order") {
    MaterialModel m = MaterialModel::stratified(
        Symmetry::isotropic, Interpolation::step, -1.0,
        {{0.0, c}, {-0.5, c}, {-0.2, c}, {-1.0, c}});
    CHECK_FALSE(m.validate().ok);
  }
  SUBCASE("nonpositive interface depth") {
    MaterialModel m = MaterialModel::stratified(Symmetry::isotropic,
                                                Interpolation::step, 0.0, {{0.0, c}});
    CHECK_FALSE(m.validate().ok);
  }
  SUBCASE("stiffness not convex") {
    MaterialModel m = MaterialModel::stratified(
        Symmetry::isotropic, Interpolation::step, -1.0,
        {{0.0, VoigtMatrix::isotropic(2.0, -0.1)}});
    const ValidationReport rep = m.validate();
    CHECK_FALSE(rep.ok);
    CHECK(rep.min_convexity_eigenvalue < 0.0);
  }
  SUBCASE("tail not constant below the interface depth") {
    MaterialModel m = MaterialModel::stratified(
        Symmetry::isotropic, Interpolation::step, -1.0,
        {{0.0, c}, {-1.0, c}, {-2.0, VoigtMatrix::isotropic(3.0, 2.0)}});
    CHECK_FALSE(m.validate().ok);
  }
  SUBCASE("declared pattern violated") {
    VoigtMatrix bad = c;
    bad(0, 3) = bad(3, 0) = 0.3;
    MaterialModel m = MaterialModel::stratified(Symmetry::isotropic,
                                                Interpolation::step, -1.0,
                                                {{0.0, bad}});
    CHECK_FALSE(m.validate().ok);
  }
}

TEST_CASE("json parsing accepts the three stiffness spellings") {
  const char* txt = R"({
    "symmetry": "isotropic",
    "Z_I": -1.0,
    "interpolation": "step",
    "knots": [
      {"Z": 0.0, "rho": 2.0, "c": {"lambda": 4.0, "mu": 2.0}},
      {"Z": -1.0, "rho": 1.0, "c": {"lambda": 4.0, "mu": 3.0}}
    ]
  })";
  MaterialModel m = parse_model(txt);
  // Entries are divided by density.
  CHECK(m.evaluate(Eigen::Vector2d::Zero(), 0.0) == VoigtMatrix::isotropic(2.0, 1.0));
  CHECK(m.evaluate(Eigen::Vector2d::Zero(), -2.0) == VoigtMatrix::isotropic(4.0, 3.0));

  const char* ti = R"({
    "symmetry": "transversely_isotropic",
    "Z_I": -0.5,
    "knots": [
      {"Z": 0.0, "rho": 1.0,
       "c": {"C11": 4.0, "C33": 3.0, "C44": 1.0, "C66": 1.2, "C13": 1.3}},
      {"Z": -0.5, "rho": 1.0,
       "c": {"C11": 4.0, "C33": 3.0, "C44": 1.0, "C66": 1.2, "C13": 1.3}}
    ]
  })";
  MaterialModel mt = parse_model(ti);
  CHECK(mt.evaluate(Eigen::Vector2d::Zero(), 0.0) ==
        VoigtMatrix::transversely_isotropic(4.0, 3.0, 1.0, 1.2, 1.3));

  // Full 6x6 array, here spelled isotropic.
  const char* arr = R"({
    "symmetry": "isotropic",
    "Z_I": -1.0,
    "knots": [
      {"Z": 0.0, "rho": 1.0, "c": [
        [4,2,2,0,0,0],
        [2,4,2,0,0,0],
        [2,2,4,0,0,0],
        [0,0,0,1,0,0],
        [0,0,0,0,1,0],
        [0,0,0,0,0,1]]},
      {"Z": -1.0, "rho": 1.0, "c": [
        [4,2,2,0,0,0],
        [2,4,2,0,0,0],
        [2,2,4,0,0,0],
        [0,0,0,1,0,0],
        [0,0,0,0,1,0],
        [0,0,0,0,0,1]]}
    ]
  })";
  MaterialModel ma = parse_model(arr);
  CHECK(ma.evaluate(Eigen::Vector2d::Zero(), 0.0) == VoigtMatrix::isotropic(2.0, 1.0));
}

TEST_CASE("json parsing rejects malformed and invalid input") {
  CHECK_THROWS_AS(parse_model("{"), ParseError);
  CHECK_THROWS_AS(parse_model("{}"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"symmetry":"cubic","Z_I":-1,"knots":[]})"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_model(
          R"({"symmetry":"isotropic","Z_I":-1,"knots":[{"Z":0,"rho":0.0,"c":{"lambda":2,"mu":1}}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_model(
          R"({"symmetry":"isotropic","Z_I":-1,"knots":[{"Z":0,"rho":1,"c":{"lambda":2}}]})"),
      ParseError);
  // Well-formed JSON, structurally invalid model: first knot below the surface.
  CHECK_THROWS_AS(
      parse_model(
          R"({"symmetry":"isotropic","Z_I":-1,"knots":[{"Z":-0.5,"rho":1,"c":{"lambda":2,"mu":1}}]})"),
      ValidationError);
  // Convexity failure.
  CHECK_THROWS_AS(
      parse_model(
          R"({"symmetry":"isotropic","Z_I":-1,"knots":[{"Z":0,"rho":1,"c":{"lambda":2,"mu":-1}}]})"),
      ValidationError);
}

TEST_CASE("lateral model evaluates bilinearly and guards its box") {
  auto column = [](double mu) {
    const VoigtMatrix c = VoigtMatrix::isotropic(1.0, mu);
    return DepthProfile({{0.0, c}, {-1.0, c}}, Interpolation::step, -1.0);
  };
  LateralGrid grid;
  grid.x1 = {0.0, 2.0};
  grid.x2 = {0.0, 4.0};
  // Row-major in (i1, i2): mu = 1 at (0,0), 2 at (0,4), 3 at (2,0), 4 at (2,4).
  MaterialModel m = MaterialModel::lateral(
      Symmetry::isotropic, Interpolation::step, -1.0, grid,
      {column(1.0), column(2.0), column(3.0), column(4.0)});
  CHECK(m.validate().ok);
  CHECK_FALSE(m.laterally_homogeneous());

  CHECK(m.evaluate({0.0, 0.0}, 0.0)(3, 3) == doctest::Approx(1.0));
  CHECK(m.evaluate({0.0, 4.0}, 0.0)(3, 3) == doctest::Approx(2.0));
  CHECK(m.evaluate({2.0, 0.0}, 0.0)(3, 3) == doctest::Approx(3.0));
  CHECK(m.evaluate({2.0, 4.0}, 0.0)(3, 3) == doctest::Approx(4.0));
  CHECK(m.evaluate({1.0, 2.0}, 0.0)(3, 3) == doctest::Approx(2.5));
  CHECK(m.profile_at(1, 0).evaluate(0.0)(3, 3) == doctest::Approx(3.0));

  CHECK_THROWS_AS(m.evaluate({-0.1, 0.0}, 0.0), OutOfDomainError);
  CHECK_THROWS_AS(m.evaluate({0.0, 4.5}, 0.0), OutOfDomainError);
}

TEST_CASE("lateral json form resolves profile references") {
  const char* txt = R"({
    "symmetry": "isotropic",
    "Z_I": -1.0,
    "lateral": {
      "x1": [0.0, 1.0],
      "x2": [0.0, 1.0],
      "profiles": [[0, 0], [0, 1]]
    },
    "profiles": [
      [{"Z": 0.0, "rho": 1.0, "c": {"lambda": 2.0, "mu": 1.0}},
       {"Z": -1.0, "rho": 1.0, "c": {"lambda": 2.0, "mu": 1.0}}],
      [{"Z": 0.0, "rho": 1.0, "c": {"lambda": 2.0, "mu": 1.5}},
       {"Z": -1.0, "rho": 1.0, "c": {"lambda": 2.0, "mu": 1.5}}]
    ]
  })";
  MaterialModel m = parse_model(txt);
  CHECK_FALSE(m.laterally_homogeneous());
  CHECK(m.evaluate({0.0, 0.0}, 0.0)(3, 3) == doctest::Approx(1.0));
  CHECK(m.evaluate({1.0, 1.0}, 0.0)(3, 3) == doctest::Approx(1.5));
}

TEST_CASE("homogeneous factory wraps a single surface knot") {
  const VoigtMatrix c = VoigtMatrix::isotropic(2.0, 1.0);
  MaterialModel m = MaterialModel::homogeneous(Symmetry::isotropic, c);
  CHECK(m.z_i() == -1.0);
  CHECK(m.validate().ok);
  CHECK(m.profiles().size() == 1);
  CHECK(m.profiles().front().tail() == c);
  CHECK(m.evaluate(Eigen::Vector2d::Zero(), -42.0) == c);
}
