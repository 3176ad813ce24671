#pragma once

#include <span>
#include <vector>

#include "qclfm/refocus.hpp"
#include "qclfm/scene.hpp"
#include "qclfm/volumetric.hpp"

namespace qclfm {

struct DofParams {
  double refractive_index = 1.0;
  double lambda_um = 0.810;
  double numerical_aperture = 0.45;
  double magnification = 20.0;
  double resolved_distance_um = 5.0;  ///< e, the feature size being resolved
};

/// Conventional-microscope depth of field n*lambda/NA^2 + n*e/(M*NA).
double conventional_dof_um(const DofParams& p);

struct ElementScore {
  int group = 0;
  int element = 0;
  double spacing_um = 0.0;
  double contrast = 0.0;  ///< min of the horizontal/vertical block contrasts
  bool resolved = false;
  bool in_fov = true;
};

struct ResolvabilityReport {
  std::vector<ElementScore> elements;
  double threshold = 0.2;
  /// Smallest line-pair spacing among resolved elements; +inf when none.
  double smallest_resolved_um = 0.0;
};

/// Scores each chart element on an image registered to the known geometry:
/// Michelson contrast between bar and gap means after subtracting the local
/// annulus median (negatives clamped). Resolved means contrast >= threshold.
ResolvabilityReport resolvability(std::span<const double> image, const GridSpec& grid,
                                  std::span<const UsafElement> elements, double threshold = 0.2);

struct DofCurvePoint {
  double z_um = 0.0;
  double smallest_resolved_um = 0.0;
  ResolvabilityReport report;
};

/// Smallest resolvable spacing per depth of an already-refocused stack.
std::vector<DofCurvePoint> dof_curve(const FocalStack& stack,
                                     std::span<const UsafElement> elements,
                                     double threshold = 0.2);

/// 3-point median filter with clamped ends; used for trend checks on curves.
std::vector<double> median_filter3(std::span<const double> values);

}  // namespace qclfm
