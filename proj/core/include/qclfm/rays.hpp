#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qclfm/common.hpp"

namespace qclfm {

/// Paraxial ray: transverse position (um) and angle (rad), both axes.
struct RayState {
  Vec2 r_um;
  Vec2 theta_rad;
};

/// 2x2 ABCD matrix. A, D dimensionless; B in um/rad; C in rad/um.
struct RayTransferMatrix {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static RayTransferMatrix identity() { return {}; }
  static RayTransferMatrix free_space(double d_um) { return {1.0, d_um, 0.0, 1.0}; }
  static RayTransferMatrix thin_lens(double f_um);

  double det() const { return a * d - b * c; }

  /// Matrix product; (m1 * m2) applies m2 first.
  RayTransferMatrix operator*(const RayTransferMatrix& rhs) const {
    return {a * rhs.a + b * rhs.c, a * rhs.b + b * rhs.d,
            c * rhs.a + d * rhs.c, c * rhs.b + d * rhs.d};
  }
};

struct OpticalElement {
  enum class Kind { kFreeSpace, kThinLens };
  Kind kind;
  double value_um;  ///< distance for free space, focal length for a thin lens

  static OpticalElement free_space(double d_um) { return {Kind::kFreeSpace, d_um}; }
  static OpticalElement thin_lens(double f_um) { return {Kind::kThinLens, f_um}; }
  RayTransferMatrix matrix() const;
};

/// An ordered train of elements. The list is written in matrix-product order:
/// compose() returns elements[0] * elements[1] * ... * elements[n-1], so the
/// rightmost (last) element acts on the ray first.
class OpticalSystem {
 public:
  OpticalSystem() = default;
  explicit OpticalSystem(std::vector<OpticalElement> elements);

  const std::vector<OpticalElement>& elements() const { return elements_; }
  const RayTransferMatrix& matrix() const { return composite_; }

  /// Transverse magnification |A| of an imaging system; empty unless B ~ 0.
  std::optional<double> magnification(double b_tolerance_um = 1.0) const;

 private:
  std::vector<OpticalElement> elements_;
  RayTransferMatrix composite_;
};

/// Ordered composite of an element train (see OpticalSystem ordering note).
RayTransferMatrix compose(const std::vector<OpticalElement>& elements);

/// r2 = A r1 + B theta1, theta2 = C r1 + D theta1, independently per axis.
RayState apply(const RayTransferMatrix& m, const RayState& ray);

/// Recovers the launch/arrival angles of a ray from its positions on the two
/// planes the matrix connects: theta1 = (r2 - A r1)/B, theta2 = C r1 + D theta1.
/// Throws NumericalError when |B| < b_threshold_um (positions alone cannot
/// determine angles through an imaging system).
std::pair<Vec2, Vec2> solve_angles(const RayTransferMatrix& m, Vec2 r1_um, Vec2 r2_um,
                                   double b_threshold_um = 1.0);

}  // namespace qclfm
