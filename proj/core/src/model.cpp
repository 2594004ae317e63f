#include "esw/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "esw/hash.hpp"

namespace esw {

using nlohmann::json;

// ---------------------------------------------------------------------------
// VoigtMatrix

VoigtMatrix VoigtMatrix::isotropic(double lambda, double mu) {
  Matrix6 m = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = lambda;
    m(i, i) = lambda + 2.0 * mu;
    m(i + 3, i + 3) = mu;
  }
  return VoigtMatrix(m);
}

VoigtMatrix VoigtMatrix::transversely_isotropic(double c11, double c33, double c44,
                                                double c66, double c13) {
  const double c12 = c11 - 2.0 * c66;
  Matrix6 m = Matrix6::Zero();
  m(0, 0) = m(1, 1) = c11;
  m(2, 2) = c33;
  m(0, 1) = m(1, 0) = c12;
  m(0, 2) = m(2, 0) = c13;
  m(1, 2) = m(2, 1) = c13;
  m(3, 3) = m(4, 4) = c44;
  m(5, 5) = c66;
  return VoigtMatrix(m);
}

double VoigtMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix6> es(0.5 * (m_ + m_.transpose()),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double VoigtMatrix::pattern_violation(Symmetry sym) const {
  switch (sym) {
    case Symmetry::isotropic: {
      const Matrix6 ref = isotropic(m_(0, 1), m_(3, 3)).matrix();
      return (m_ - ref).cwiseAbs().maxCoeff();
    }
    case Symmetry::transversely_isotropic: {
      const Matrix6 ref = transversely_isotropic(m_(0, 0), m_(2, 2), m_(3, 3),
                                                 m_(5, 5), m_(0, 2))
                              .matrix();
      return (m_ - ref).cwiseAbs().maxCoeff();
    }
    case Symmetry::monoclinic_x2z: {
      // Mirror x2 -> -x2: components with an odd number of index-2 factors
      // vanish. In Voigt terms the {1,2,3,5} x {4,6} blocks are zero.
      const int odd[2] = {3, 5};   // Voigt 4 (23) and 6 (12)
      const int even[4] = {0, 1, 2, 4};
      double viol = 0.0;
      for (int a : even)
        for (int b : odd)
          viol = std::max({viol, std::abs(m_(a, b)), std::abs(m_(b, a))});
      return viol;
    }
    case Symmetry::general:
      return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// DepthProfile

DepthProfile::DepthProfile(std::vector<DepthKnot> knots, Interpolation interp,
                           double z_tail)
    : knots_(std::move(knots)), interp_(interp), z_tail_(z_tail) {}

namespace {

// Interpolation without the tail rule; validate() uses it to probe the raw
// profile at the interface depth.
VoigtMatrix raw_evaluate(const std::vector<DepthKnot>& knots, Interpolation interp,
                         double z) {
  if (z >= knots.front().z) return knots.front().c;
  if (z <= knots.back().z) return knots.back().c;
  // First knot at or above z; knots are strictly decreasing in z.
  std::size_t lo = 0, hi = knots.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (knots[mid].z >= z)
      lo = mid;
    else
      hi = mid;
  }
  if (knots[hi].z == z) return knots[hi].c;
  if (interp == Interpolation::step) return knots[lo].c;
  const double t = (knots[lo].z - z) / (knots[lo].z - knots[hi].z);
  return VoigtMatrix((1.0 - t) * knots[lo].c.matrix() + t * knots[hi].c.matrix());
}

}  // namespace

VoigtMatrix DepthProfile::evaluate(double z) const {
  if (z <= z_tail_) return knots_.back().c;
  return raw_evaluate(knots_, interp_, z);
}

// ---------------------------------------------------------------------------
// MaterialModel

MaterialModel MaterialModel::stratified(Symmetry sym, Interpolation interp,
                                        double z_i, std::vector<DepthKnot> knots,
                                        std::optional<double> delta) {
  MaterialModel m;
  m.symmetry_ = sym;
  m.interp_ = interp;
  m.z_i_ = z_i;
  m.profiles_.emplace_back(std::move(knots), interp, z_i);
  if (delta) {
    m.delta_ = *delta;
    m.delta_explicit_ = true;
  }
  m.finalize();
  return m;
}

MaterialModel MaterialModel::homogeneous(Symmetry sym, const VoigtMatrix& c,
                                         double z_i) {
  std::vector<DepthKnot> knots{DepthKnot{0.0, c}};
  if (z_i < 0.0) knots.push_back(DepthKnot{z_i, c});
  return stratified(sym, Interpolation::step, z_i, std::move(knots));
}

MaterialModel MaterialModel::lateral(Symmetry sym, Interpolation interp, double z_i,
                                     LateralGrid grid,
                                     std::vector<DepthProfile> profiles,
                                     std::optional<double> delta) {
  MaterialModel m;
  m.symmetry_ = sym;
  m.interp_ = interp;
  m.z_i_ = z_i;
  m.lateral_ = std::move(grid);
  m.profiles_ = std::move(profiles);
  if (delta) {
    m.delta_ = *delta;
    m.delta_explicit_ = true;
  }
  m.finalize();
  return m;
}

const DepthProfile& MaterialModel::profile_at(int i1, int i2) const {
  if (laterally_homogeneous()) return profiles_.front();
  const int n2 = static_cast<int>(lateral_.x2.size());
  return profiles_[static_cast<std::size_t>(i1) * n2 + i2];
}

namespace {

// Cell index and weight along one axis; xs strictly increasing.
std::pair<int, double> locate(const std::vector<double>& xs, double x) {
  if (xs.size() == 1) return {0, 0.0};
  if (x < xs.front() || x > xs.back())
    throw OutOfDomainError("lateral position outside model grid");
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  int i = static_cast<int>(it - xs.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(xs.size()) - 2);
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return {i, t};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

VoigtMatrix MaterialModel::evaluate(const Eigen::Vector2d& x, double z) const {
  if (laterally_homogeneous()) return profiles_.front().evaluate(z);
  const auto [i1, t1] = locate(lateral_.x1, x(0));
  const auto [i2, t2] = locate(lateral_.x2, x(1));
  Matrix6 acc = Matrix6::Zero();
  const int n1 = static_cast<int>(lateral_.x1.size());
  const int n2 = static_cast<int>(lateral_.x2.size());
  for (int a = 0; a < 2; ++a) {
    const int j1 = std::min(i1 + a, n1 - 1);
    const double w1 = (a == 0) ? 1.0 - t1 : t1;
    if (w1 == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      const int j2 = std::min(i2 + b, n2 - 1);
      const double w2 = (b == 0) ? 1.0 - t2 : t2;
      if (w2 == 0.0) continue;
      acc += (w1 * w2) * profile_at(j1, j2).evaluate(z).matrix();
    }
  }
  return VoigtMatrix(acc);
}

void MaterialModel::finalize() {
  if (!delta_explicit_) {
    double max_diag = 0.0;
    for (const auto& p : profiles_)
      for (const auto& k : p.knots()) max_diag = std::max(max_diag, k.c.max_diagonal());
    delta_ = 1e-8 * max_diag;
  }
  std::ostringstream os;
  os << symmetry_name(symmetry_) << '|' << interpolation_name(interp_) << '|'
     << format_double(z_i_) << '|' << format_double(delta_) << '|';
  for (double v : lateral_.x1) os << format_double(v) << ',';
  os << '|';
  for (double v : lateral_.x2) os << format_double(v) << ',';
  for (const auto& p : profiles_) {
    os << "|p";
    for (const auto& k : p.knots()) {
      os << ';' << format_double(k.z);
      const Matrix6& m = k.c.matrix();
      for (int a = 0; a < 6; ++a)
        for (int b = a; b < 6; ++b) os << ',' << format_double(m(a, b));
    }
  }
  content_hash_ = fnv1a64(os.str());
}

std::string ValidationReport::summary() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (const auto& i : issues) {
    os << i.field;
    if (i.profile >= 0) os << " profile " << i.profile;
    if (i.knot >= 0) os << " knot " << i.knot;
    os << ": " << i.message << "; ";
  }
  return os.str();
}

ValidationReport MaterialModel::validate() const {
  ValidationReport rep;
  rep.delta = delta_;
  rep.min_convexity_eigenvalue = std::numeric_limits<double>::infinity();
  auto fail = [&rep](std::string field, int profile, int knot, std::string msg) {
    rep.ok = false;
    rep.issues.push_back({std::move(field), profile, knot, std::move(msg)});
  };

  if (profiles_.empty()) {
    fail("ordering", -1, -1, "model has no profiles");
    return rep;
  }
  if (!(z_i_ < 0.0)) fail("ordering", -1, -1, "Z_I must be negative");
  if (!lateral_.empty()) {
    auto increasing = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
      return true;
    };
    if (!increasing(lateral_.x1) || !increasing(lateral_.x2))
      fail("lateral", -1, -1, "lateral grid coordinates must be strictly increasing");
    if (profiles_.size() != lateral_.x1.size() * lateral_.x2.size())
      fail("lateral", -1, -1, "profile count does not match lateral grid size");
  } else if (profiles_.size() != 1) {
    fail("lateral", -1, -1, "laterally homogeneous model must have one profile");
  }

  for (int p = 0; p < static_cast<int>(profiles_.size()); ++p) {
    const auto& knots = profiles_[p].knots();
    if (knots.empty()) {
      fail("ordering", p, -1, "profile has no knots");
      continue;
    }
    if (knots.front().z != 0.0) fail("ordering", p, 0, "first knot must be at Z = 0");
    for (int k = 1; k < static_cast<int>(knots.size()); ++k)
      if (!(knots[k].z < knots[k - 1].z))
        fail("ordering", p, k, "knot depths must be strictly decreasing");
    if (!(knots.back().z <= z_i_))
      fail("tail", p, static_cast<int>(knots.size()) - 1,
           "deepest knot must lie at or below Z_I");

    for (int k = 0; k < static_cast<int>(knots.size()); ++k) {
      const VoigtMatrix& c = knots[k].c;
      const double scale = std::max(1.0, c.matrix().cwiseAbs().maxCoeff());
      if (!c.is_symmetric(1e-12 * scale))
        fail("symmetry", p, k, "stiffness matrix is not symmetric");
      const double viol = c.pattern_violation(symmetry_);
      if (viol > 1e-10 * scale)
        fail("pattern", p, k,
             "entries violate the declared " + std::string(symmetry_name(symmetry_)) +
                 " pattern by " + format_double(viol));
      const double emin = c.min_eigenvalue();
      rep.min_convexity_eigenvalue = std::min(rep.min_convexity_eigenvalue, emin);
      if (!(emin > delta_))
        fail("convexity", p, k,
             "smallest Voigt eigenvalue " + format_double(emin) +
                 " does not clear the margin " + format_double(delta_));
    }

    // Constant tail: every knot at or below Z_I must equal the deepest knot
    // exactly, and the raw interpolation must reach that value at Z_I.
    const VoigtMatrix& tail = knots.back().c;
    for (int k = 0; k < static_cast<int>(knots.size()); ++k)
      if (knots[k].z <= z_i_ && !(knots[k].c == tail))
        fail("tail", p, k, "knot at or below Z_I differs from the tail value");
    if (knots.back().z <= z_i_) {
      const VoigtMatrix at_zi = raw_evaluate(knots, interp_, z_i_);
      if (!(at_zi == tail))
        fail("tail", p, -1, "profile is not constant down to Z_I");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON input

namespace {

VoigtMatrix knot_stiffness(const json& c, double rho, Symmetry sym) {
  if (c.is_array()) {
    if (c.size() != 6) throw ParseError("stiffness array must be 6x6");
    Matrix6 m;
    for (int a = 0; a < 6; ++a) {
      if (!c[a].is_array() || c[a].size() != 6)
        throw ParseError("stiffness array must be 6x6");
      for (int b = 0; b < 6; ++b) m(a, b) = c[a][b].get<double>() / rho;
    }
    return VoigtMatrix(m);
  }
  if (c.is_object()) {
    if (c.contains("lambda") && c.contains("mu"))
      return VoigtMatrix::isotropic(c.at("lambda").get<double>() / rho,
                                    c.at("mu").get<double>() / rho);
    if (c.contains("C11"))
      return VoigtMatrix::transversely_isotropic(
          c.at("C11").get<double>() / rho, c.at("C33").get<double>() / rho,
          c.at("C44").get<double>() / rho, c.at("C66").get<double>() / rho,
          c.at("C13").get<double>() / rho);
    throw ParseError("stiffness object needs lambda/mu or C11/C33/C44/C66/C13");
  }
  (void)sym;
  throw ParseError("stiffness must be a 6x6 array or a named-constant object");
}

std::vector<DepthKnot> parse_knots(const json& arr, Symmetry sym) {
  if (!arr.is_array() || arr.empty()) throw ParseError("knots must be a non-empty array");
  std::vector<DepthKnot> knots;
  knots.reserve(arr.size());
  for (const auto& jk : arr) {
    if (!jk.contains("Z") || !jk.contains("rho") || !jk.contains("c"))
      throw ParseError("knot needs Z, rho and c");
    const double rho = jk.at("rho").get<double>();
    if (!(rho > 0.0)) throw ParseError("rho must be positive");
    knots.push_back({jk.at("Z").get<double>(), knot_stiffness(jk.at("c"), rho, sym)});
  }
  return knots;
}

Symmetry parse_symmetry(const std::string& s) {
  if (s == "isotropic") return Symmetry::isotropic;
  if (s == "transversely_isotropic") return Symmetry::transversely_isotropic;
  if (s == "monoclinic_x2Z") return Symmetry::monoclinic_x2z;
  if (s == "general") return Symmetry::general;
  throw ParseError("unknown symmetry '" + s + "'");
}

}  // namespace

MaterialModel parse_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  MaterialModel model;
  try {
    const Symmetry sym = parse_symmetry(j.at("symmetry").get<std::string>());
    const double z_i = j.at("Z_I").get<double>();
    const std::string interp_s = j.value("interpolation", std::string("step"));
    Interpolation interp;
    if (interp_s == "step")
      interp = Interpolation::step;
    else if (interp_s == "linear")
      interp = Interpolation::linear;
    else
      throw ParseError("interpolation must be 'step' or 'linear'");
    std::optional<double> delta;
    if (j.contains("delta")) delta = j.at("delta").get<double>();

    if (j.contains("lateral")) {
      const json& jl = j.at("lateral");
      LateralGrid grid;
      grid.x1 = jl.at("x1").get<std::vector<double>>();
      grid.x2 = jl.at("x2").get<std::vector<double>>();
      const json& refs = jl.at("profiles");
      const json& pool = j.at("profiles");
      if (!refs.is_array() || refs.size() != grid.x1.size())
        throw ParseError("lateral.profiles must have one row per x1 sample");
      std::vector<DepthProfile> profiles;
      for (const auto& row : refs) {
        if (!row.is_array() || row.size() != grid.x2.size())
          throw ParseError("lateral.profiles rows must match the x2 grid");
        for (const auto& ref : row) {
          const std::size_t idx = ref.get<std::size_t>();
          if (idx >= pool.size()) throw ParseError("profile reference out of range");
          profiles.emplace_back(parse_knots(pool[idx], sym), interp, z_i);
        }
      }
      model = MaterialModel::lateral(sym, interp, z_i, std::move(grid),
                                     std::move(profiles), delta);
    } else {
      model = MaterialModel::stratified(sym, interp, z_i,
                                        parse_knots(j.at("knots"), sym), delta);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }

  const ValidationReport rep = model.validate();
  if (!rep.ok) throw ValidationError("model validation failed: " + rep.summary());
  return model;
}

MaterialModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

const char* symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::isotropic: return "isotropic";
    case Symmetry::transversely_isotropic: return "transversely_isotropic";
    case Symmetry::monoclinic_x2z: return "monoclinic_x2Z";
    case Symmetry::general: return "general";
  }
  return "?";
}

const char* interpolation_name(Interpolation i) {
  return i == Interpolation::step ? "step" : "linear";
}

}  // namespace esw
