#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esw/errors.hpp"
#include "esw/voigt.hpp"

namespace esw {

enum class Interpolation { step, linear };

/// One depth sample of the density-normalized stiffness. z <= 0, surface at 0.
struct DepthKnot {
  double z = 0.0;
  VoigtMatrix c;
};

/// Piecewise stiffness profile on the half line. Knots are ordered strictly
/// decreasing in z starting at 0. Step interpolation takes the value of the
/// shallower knot between knots; knots evaluate to their own value. Linear
/// interpolation is entrywise. At and below z_tail the deepest knot value is
/// returned exactly (early return, bit-identical).
class DepthProfile {
 public:
  DepthProfile() = default;
  DepthProfile(std::vector<DepthKnot> knots, Interpolation interp, double z_tail);

  const std::vector<DepthKnot>& knots() const { return knots_; }
  Interpolation interpolation() const { return interp_; }
  double z_tail() const { return z_tail_; }

  VoigtMatrix evaluate(double z) const;
  const VoigtMatrix& tail() const { return knots_.back().c; }

 private:
  std::vector<DepthKnot> knots_;
  Interpolation interp_ = Interpolation::step;
  double z_tail_ = 0.0;
};

struct LateralGrid {
  std::vector<double> x1;  // strictly increasing
  std::vector<double> x2;  // strictly increasing
  bool empty() const { return x1.empty(); }
};

struct ValidationIssue {
  std::string field;    // "convexity", "tail", "ordering", "pattern", ...
  int profile = -1;     // -1 when not profile-specific
  int knot = -1;        // -1 when not knot-specific
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  double min_convexity_eigenvalue = 0.0;
  double delta = 0.0;  // margin the convexity test used
  std::string summary() const;
};

/// Stratified (optionally laterally varying) anisotropic medium. Laterally
/// varying models hold one DepthProfile per lateral grid node, row-major in
/// (i1, i2), and evaluate by bilinear combination of the per-node profiles.
class MaterialModel {
 public:
  MaterialModel() = default;

  /// Laterally homogeneous model from a single profile.
  static MaterialModel stratified(Symmetry sym, Interpolation interp, double z_i,
                                  std::vector<DepthKnot> knots,
                                  std::optional<double> delta = std::nullopt);

  /// One constant-coefficient half space.
  static MaterialModel homogeneous(Symmetry sym, const VoigtMatrix& c,
                                   double z_i = -1.0);

  /// Laterally varying model; profiles.size() == x1.size() * x2.size().
  static MaterialModel lateral(Symmetry sym, Interpolation interp, double z_i,
                               LateralGrid grid, std::vector<DepthProfile> profiles,
                               std::optional<double> delta = std::nullopt);

  Symmetry symmetry() const { return symmetry_; }
  Interpolation interpolation() const { return interp_; }
  double z_i() const { return z_i_; }
  double delta() const { return delta_; }
  std::uint64_t content_hash() const { return content_hash_; }

  bool laterally_homogeneous() const { return lateral_.empty(); }
  const LateralGrid& lateral_grid() const { return lateral_; }
  const std::vector<DepthProfile>& profiles() const { return profiles_; }

  /// Profile at lateral grid node (i1, i2).
  const DepthProfile& profile_at(int i1, int i2) const;

  /// Density-normalized stiffness at lateral position x and depth z.
  /// Throws OutOfDomainError when x lies outside the lateral box.
  VoigtMatrix evaluate(const Eigen::Vector2d& x, double z) const;

  /// Structural checks: knot ordering, symmetry of every matrix, declared
  /// zero pattern, strong convexity against delta, constant tail at z <= Z_I.
  ValidationReport validate() const;

 private:
  void finalize();  // computes delta default and content hash

  Symmetry symmetry_ = Symmetry::isotropic;
  Interpolation interp_ = Interpolation::step;
  double z_i_ = -1.0;
  double delta_ = 0.0;
  bool delta_explicit_ = false;
  LateralGrid lateral_;
  std::vector<DepthProfile> profiles_;
  std::uint64_t content_hash_ = 0;
};

/// Parse a model from JSON text. Throws ParseError on malformed input and
/// ValidationError when the parsed model fails MaterialModel::validate().
MaterialModel parse_model(const std::string& json_text);

/// Read and parse a model file.
MaterialModel load_model(const std::string& path);

const char* symmetry_name(Symmetry s);
const char* interpolation_name(Interpolation i);

}  // namespace esw
