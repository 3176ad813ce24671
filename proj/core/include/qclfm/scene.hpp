#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qclfm/common.hpp"
#include "qclfm/field.hpp"
#include "qclfm/spdc.hpp"

namespace qclfm {

/// A thin transmission mask (|t| <= 1) placed in the signal arm.
///
/// Image-plane placement: the target sits z_offset away from the plane the
/// signal camera is conjugate to; the captured field is propagate(t, z_offset).
/// Fourier-plane placement: the target sits in the crystal's Fourier plane,
/// where transverse momentum maps to position at fourier_scale_um_per_k; it
/// then gates photons by momentum and leaves the near-field image unchanged.
struct SceneTarget {
  ComplexField transmission;
  double z_offset_um = 0.0;
  bool fourier_plane = false;
  double fourier_scale_um_per_k = 1.0e3;
};

/// Depth-ordered stack of thin targets (strictly increasing z, one per depth).
struct VolumetricScene {
  std::vector<SceneTarget> slices;
};

/// Geometry of one USAF chart element on the canvas (grid-center origin, um).
/// Each element is a block of three horizontal bars beside a block of three
/// vertical bars; bars are transmissive on an opaque background.
struct UsafElement {
  int group = 0;
  int element = 0;
  double spacing_um = 0.0;    ///< line-pair spacing 1000 / (2^(group+(element-1)/6)) um
  double bar_width_um = 0.0;  ///< spacing / 2
  double bar_length_um = 0.0; ///< 5x bar width
  Vec2 h_center_um;           ///< center of the horizontal-bar block (bars run along x)
  Vec2 v_center_um;           ///< center of the vertical-bar block (bars run along y)
};

struct UsafTarget {
  SceneTarget target;
  std::vector<UsafElement> elements;
};

/// Line-pair frequency of a chart element in lp/mm.
double usaf_frequency_lp_mm(int group, int element);

/// Renders the requested elements of one group, stacked vertically and
/// centered. Throws when a bar would be narrower than two grid pixels.
UsafTarget usaf_target(int group, const std::vector<int>& elements, double pitch_um,
                       int size_px, double lambda_um);

/// Renders an arbitrary set of (group, element) entries on one canvas.
UsafTarget usaf_chart(const std::vector<std::pair<int, int>>& items, double pitch_um,
                      int size_px, double lambda_um);

/// An opaque straight strand: |distance to the center line| <= width/2 blocks.
struct FiberSpec {
  Vec2 center_um;
  double angle_rad = 0.0;
  double width_um = 5.0;
  double z_um = 0.0;
};

struct SceneGrid {
  int size_px = 128;
  double pitch_um = 1.0;
};

/// Rasterizes explicit fiber strands, one depth slice per fiber.
VolumetricScene fiber_scene(std::span<const FiberSpec> fibers, const SceneGrid& grid,
                            double lambda_um);

/// Randomly oriented opaque strands with widths in [diameter_min, diameter_max]
/// and depths in [z_min, z_max]; deterministic by seed.
VolumetricScene fiber_phantom(int n_fibers, double diameter_min_um, double diameter_max_um,
                              double z_min_um, double z_max_um, std::uint64_t seed,
                              const SceneGrid& grid, double lambda_um);

struct Illumination {
  enum class Kind { kUniform, kGaussian };
  Kind kind = Kind::kUniform;
  double waist_um = 0.0;  ///< Gaussian amplitude waist; unused for uniform
};

struct SceneSamplerOptions {
  /// Tilt cache bin width (1/um) for the multi-slice path; single-slice
  /// sampling translates per photon and does not quantize.
  double momentum_bin_k = 13.7e-3;
  /// Propagate each tilt with its exact shifted k_z instead of the
  /// shift-theorem translation (error studies; single-slice only).
  bool exact_tilt = false;
};

/// Samples where target-transmitted signal photons land on the plane the
/// camera is conjugate to. For each momentum the detection density is the
/// normal-incidence diffraction intensity translated by theta*z per slice
/// (slices compose multiplicatively; inter-slice re-diffraction is ignored).
class ScenePropagator {
 public:
  ScenePropagator(VolumetricScene scene, Illumination illumination,
                  const SceneSamplerOptions& options = {});

  /// Fraction of illumination power the scene transmits (mean |t|^2 weighted
  /// by the illumination envelope); equals the expected acceptance rate.
  double throughput() const { return throughput_; }

  /// For each pair: the signal photon's landing position (sample-plane um) or
  /// nullopt when absorbed. Deterministic per (seed, element index) so batch
  /// splits cannot change results.
  std::vector<std::optional<Vec2>> sample_batch(std::span<const PhotonPairEvent> pairs,
                                                std::uint64_t seed) const;

  const VolumetricScene& scene() const { return scene_; }

 private:
  struct SliceCache {
    std::vector<double> intensity;  ///< |propagate(t, z)|^2 on the grid
    double z_um = 0.0;
  };

  std::optional<Vec2> sample_single(const Vec2& k_signal, SmallRng& rng) const;
  std::vector<double> tilted_density(const Vec2& k_bin) const;

  VolumetricScene scene_;
  Illumination illumination_;
  SceneSamplerOptions options_;
  int width_ = 0, height_ = 0;
  double pitch_um_ = 0.0;
  double lambda_um_ = 0.0;
  double k_ = 0.0;
  std::vector<double> envelope_;        ///< |A|^2
  std::vector<SliceCache> slices_;      ///< image-plane slices only
  const SceneTarget* fourier_slice_ = nullptr;
  std::vector<double> fourier_intensity_;  ///< |t|^2 of the Fourier-plane mask
  // single image-plane slice fast path
  std::vector<double> single_cdf_;
  double single_total_ = 0.0;
  double throughput_ = 1.0;
};

}  // namespace qclfm
