#pragma once

#include <span>
#include <vector>

#include "qclfm/refocus.hpp"

namespace qclfm {

/// Refocused amplitude images over an ordered depth sweep, one shared grid.
struct FocalStack {
  GridSpec grid;
  double lambda_um = 0.0;
  std::vector<double> z_um;                 ///< strictly increasing
  std::vector<std::vector<double>> slices;  ///< recovered amplitude per depth
};

struct SweepOptions {
  RefocusOptions refocus;
  int gs_iterations = 10;
};

/// Runs ray-trace refocusing plus retrieval at every depth in
/// [z_min, z_max] stepped by z_step; slices are computed concurrently.
FocalStack sweep(std::span<const CoincidenceRecord> records, double z_min_um, double z_max_um,
                 double z_step_um, const GridSpec& grid, double lambda_um,
                 const SweepOptions& options = {});

/// Pixel-wise sum of the slice amplitudes (full precision, unnormalized).
std::vector<double> all_in_focus(const FocalStack& stack);

struct DepthMap {
  GridSpec grid;
  std::vector<float> z_um;         ///< per-pixel depth, NaN where masked
  std::vector<double> confidence;  ///< peak prominence of the sharpness score
  std::vector<bool> masked;
};

struct DepthMapOptions {
  int window_px = 9;  ///< local-variance window for the sharpness score
  bool modified_laplacian = false;
  double mad_k = 2.0;  ///< background threshold: median + k * MAD of peak scores
};

/// Shape-from-focus depth map: per pixel the depth with the sharpest local
/// score wins (ties go to the smaller |z|); pixels whose peak score does not
/// rise above the robust background threshold are masked.
DepthMap depth_map(const FocalStack& stack, const DepthMapOptions& options = {});

/// Per-slice sharpness map used by depth_map; exposed for diagnostics.
std::vector<double> sharpness_map(std::span<const double> image, const GridSpec& grid,
                                  const DepthMapOptions& options);

}  // namespace qclfm
