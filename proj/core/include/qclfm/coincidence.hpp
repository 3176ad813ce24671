#pragma once

#include <span>
#include <vector>

#include "qclfm/common.hpp"
#include "qclfm/detector.hpp"

namespace qclfm {

/// Which detection events belong to the idler side: a dedicated camera id in
/// dual-camera mode, or a pixel rectangle in the single-camera layout.
struct IdlerRegion {
  bool dual_camera = true;
  std::uint8_t idler_cam = 1;
  // single-camera rectangle, pixel units, [x0, x0+width) x [y0, y0+height)
  int x0 = 0, y0 = 0, width = 0, height = 0;

  bool is_idler(const DetectionEvent& e) const {
    if (dual_camera) return e.cam == idler_cam;
    return e.x_px >= x0 && e.x_px < x0 + width && e.y_px >= y0 && e.y_px < y0 + height;
  }
};

/// Pixel <-> physical maps for the two arms. The idler arm images the crystal
/// Fourier plane, so its pixel offset from the beam center measures transverse
/// momentum at k_per_px per pixel. The signal arm images the sample plane at
/// the given magnification (or the Fourier plane in the calibration layout).
struct Calibration {
  double signal_magnification = 20.0;
  Vec2 signal_center_px{128.0, 128.0};
  double signal_pitch_um = 55.0;
  bool signal_plane_fourier = false;
  double signal_k_per_px = 13.7e-3;  ///< used only when signal_plane_fourier

  double idler_k_per_px = 13.7e-3;
  Vec2 idler_center_px{128.0, 128.0};

  Vec2 signal_position_um(const DetectionEvent& e) const {
    return {(e.x_px - signal_center_px.x) * signal_pitch_um / signal_magnification,
            (e.y_px - signal_center_px.y) * signal_pitch_um / signal_magnification};
  }
  Vec2 signal_momentum(const DetectionEvent& e) const {
    return {(e.x_px - signal_center_px.x) * signal_k_per_px,
            (e.y_px - signal_center_px.y) * signal_k_per_px};
  }
  Vec2 idler_momentum(const DetectionEvent& e) const {
    return {(e.x_px - idler_center_px.x) * idler_k_per_px,
            (e.y_px - idler_center_px.y) * idler_k_per_px};
  }
};

/// A matched signal/idler event pair; dt = t_signal - t_idler.
struct MatchedPair {
  DetectionEvent signal;
  DetectionEvent idler;
  double dt_ns = 0.0;
};

/// A coincidence in reconstruction coordinates: signal position in the sample
/// plane and the momentum inferred from the idler's Fourier-plane pixel.
struct CoincidenceRecord {
  Vec2 signal_pos_um;
  Vec2 idler_k;
  double dt_ns = 0.0;
};

/// Greedy nearest-in-time unique matching between idler and signal events
/// within |dt| <= gate/2 (gate is the total window width). Events must be
/// time-sorted; each event is used at most once; ties break toward the
/// earlier signal event.
std::vector<MatchedPair> pair_events(std::span<const DetectionEvent> events, double gate_ns,
                                     const IdlerRegion& region);

/// Accidental-floor estimate: pairs after shifting every idler timestamp by
/// shift_ns (chosen far outside the gate), destroying true correlations.
std::vector<MatchedPair> time_shifted_pairs(std::span<const DetectionEvent> events,
                                            double gate_ns, const IdlerRegion& region,
                                            double shift_ns);

/// Converts matched pairs into reconstruction records via the calibration.
std::vector<CoincidenceRecord> to_sample_plane(std::span<const MatchedPair> pairs,
                                               const Calibration& calib);

struct Histogram1D {
  double lo = 0.0, hi = 0.0;
  std::vector<double> counts;

  int bins() const { return static_cast<int>(counts.size()); }
  double bin_width() const { return (hi - lo) / bins(); }
  double center(int i) const { return lo + (i + 0.5) * bin_width(); }
  void add(double x, double w = 1.0) {
    int i = static_cast<int>(std::floor((x - lo) / bin_width()));
    if (i >= 0 && i < bins()) counts[i] += w;
  }
};

struct Histogram2D {
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  int nx = 0, ny = 0;
  std::vector<double> counts;  ///< row-major, index = iy*nx + ix

  void add(double x, double y, double w = 1.0) {
    int ix = static_cast<int>(std::floor((x - x_lo) / (x_hi - x_lo) * nx));
    int iy = static_cast<int>(std::floor((y - y_lo) / (y_hi - y_lo) * ny));
    if (ix >= 0 && ix < nx && iy >= 0 && iy < ny) counts[static_cast<std::size_t>(iy) * nx + ix] += w;
  }
  Histogram1D project_x() const;
  Histogram1D project_y() const;
};

Histogram2D make_histogram2d(double x_lo, double x_hi, int nx, double y_lo, double y_hi, int ny);

/// Joint momentum products of a dual-Fourier-plane calibration run.
struct JointMomentum {
  Histogram2D kx_joint;   ///< (k1x, k2x)
  Histogram2D ky_joint;   ///< (k1y, k2y)
  Histogram2D sum_2d;     ///< (k1x+k2x, k1y+k2y)
  Histogram1D sum_x;      ///< projection of k1x+k2x
  Histogram1D sum_y;
  std::size_t records = 0;
  bool low_statistics = false;  ///< set when fewer than 1000 records went in
};

struct JointMomentumOptions {
  int bins = 64;
  double k_range = 0.0;        ///< half-range of the joint axes; 0 = auto from data
  double sum_range = 0.0;      ///< half-range of the sum axes; 0 = auto
  double accidental_shift_ns = 0.0;  ///< when > 0, subtract time-shifted background
};

JointMomentum joint_momentum_histogram(std::span<const DetectionEvent> events, double gate_ns,
                                       const IdlerRegion& region, const Calibration& calib,
                                       const JointMomentumOptions& opts = {});

/// Least-squares fit of f(k) = a exp(-(k-b)^2 / (2 sigma^2)) to a profile.
struct GaussianFit {
  double a = 0.0;
  double b = 0.0;
  double sigma = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  ///< sigma exceeded the profile domain width
};

/// Throws NumericalError carrying the last iterate's values in the message on
/// non-convergence; degenerate fits (flat input) are flagged, not thrown.
GaussianFit fit_gaussian(const Histogram1D& profile);

/// Coincidence image in idler coordinates (ghost image). Bins are idler
/// momentum; near the crystal Fourier plane the target silhouette appears
/// here even though idler photons never met the target.
Histogram2D ghost_image(std::span<const MatchedPair> pairs, const Calibration& calib, int bins,
                        double k_half_range);

}  // namespace qclfm
