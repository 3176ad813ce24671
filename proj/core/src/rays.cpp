#include "qclfm/rays.hpp"

#include <cmath>

namespace qclfm {

RayTransferMatrix RayTransferMatrix::thin_lens(double f_um) {
  if (f_um == 0.0) throw ConfigError("thin lens focal length must be nonzero");
  return {1.0, 0.0, -1.0 / f_um, 1.0};
}

RayTransferMatrix OpticalElement::matrix() const {
  switch (kind) {
    case Kind::kFreeSpace:
      return RayTransferMatrix::free_space(value_um);
    case Kind::kThinLens:
      return RayTransferMatrix::thin_lens(value_um);
  }
  return RayTransferMatrix::identity();
}

RayTransferMatrix compose(const std::vector<OpticalElement>& elements) {
  if (elements.empty()) throw ConfigError("optical system has no elements");
  RayTransferMatrix m = elements.front().matrix();
  for (std::size_t i = 1; i < elements.size(); ++i) {
    m = m * elements[i].matrix();
  }
  return m;
}

OpticalSystem::OpticalSystem(std::vector<OpticalElement> elements)
    : elements_(std::move(elements)), composite_(compose(elements_)) {}

std::optional<double> OpticalSystem::magnification(double b_tolerance_um) const {
  if (std::abs(composite_.b) > b_tolerance_um) return std::nullopt;
  return std::abs(composite_.a);
}

RayState apply(const RayTransferMatrix& m, const RayState& ray) {
  RayState out;
  out.r_um = {m.a * ray.r_um.x + m.b * ray.theta_rad.x,
              m.a * ray.r_um.y + m.b * ray.theta_rad.y};
  out.theta_rad = {m.c * ray.r_um.x + m.d * ray.theta_rad.x,
                   m.c * ray.r_um.y + m.d * ray.theta_rad.y};
  return out;
}

std::pair<Vec2, Vec2> solve_angles(const RayTransferMatrix& m, Vec2 r1_um, Vec2 r2_um,
                                   double b_threshold_um) {
  if (std::abs(m.b) < b_threshold_um) {
    throw NumericalError("solve_angles: |B| below threshold, system is degenerate for "
                         "position-only angle recovery");
  }
  Vec2 theta1 = {(r2_um.x - m.a * r1_um.x) / m.b, (r2_um.y - m.a * r1_um.y) / m.b};
  Vec2 theta2 = {m.c * r1_um.x + m.d * theta1.x, m.c * r1_um.y + m.d * theta1.y};
  return {theta1, theta2};
}

}  // namespace qclfm
