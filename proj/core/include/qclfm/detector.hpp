#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qclfm/common.hpp"

namespace qclfm {

/// Intensifier flash model: a detected photon lights up a small cluster of
/// pixels. Cluster pixel count is uniform in [min_size, max_size]; the spatial
/// footprint is Gaussian around the true hit position; per-pixel amplitude
/// follows the footprint weight with multiplicative spread. Brighter pixels
/// are timestamped earlier by time_skew_ns per unit normalized amplitude.
struct ClusterModel {
  int min_size = 2;
  int max_size = 6;
  double sigma_x_px = 0.7;
  double sigma_y_px = 0.7;
  double amplitude_gain = 100.0;
  double amplitude_spread = 0.25;  ///< uniform +/- fraction on pixel amplitudes
  double time_skew_ns = 5.0;       ///< earlier arrival per unit a/gain
};

struct CameraParams {
  int width_px = 256;
  int height_px = 256;
  double pitch_um = 55.0;
  double clock_ns = 1.6;       ///< timestamp quantization step
  double jitter_ns = 8.0;      ///< effective post-correction timing accuracy
  double quantum_efficiency = 0.07;
  double dark_rate_per_s = 0.0;  ///< sensor-wide background event rate
  bool ideal = false;            ///< bypass pixelation/clustering/jitter entirely
  ClusterModel cluster;
};

/// A photon arriving at the sensor, camera frame, origin at the sensor center.
struct CameraPhoton {
  double x_um = 0.0;
  double y_um = 0.0;
  double t_ns = 0.0;
};

/// One pixel firing. Timestamps are already clock-quantized.
struct RawPixelHit {
  std::uint8_t cam = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  double t_ns = 0.0;
  float amplitude = 0.0f;
};

/// A centroided single-photon event. Positions are fractional pixels.
struct DetectionEvent {
  std::uint8_t cam = 0;
  double x_px = 0.0;
  double y_px = 0.0;
  double t_ns = 0.0;
  std::uint16_t cluster_size = 1;
};

struct DetectReport {
  std::size_t input = 0;
  std::size_t survived_qe = 0;
  std::size_t off_sensor = 0;
  std::size_t dark_events = 0;
  /// Per input photon: true when it survived QE and landed on the sensor.
  std::vector<bool> detected;
};

/// Simulates the camera on a photon batch: QE thinning, cluster generation,
/// intensity-dependent timing, clock quantization, dark counts. Hits are
/// returned time-sorted. Deterministic per (seed, photon index).
std::vector<RawPixelHit> detect(std::span<const CameraPhoton> photons, const CameraParams& params,
                                std::uint8_t cam_id, std::uint64_t seed, double duration_s,
                                DetectReport* report = nullptr);

/// Ideal readout used by noiseless studies: exact positions and times, one
/// event per surviving photon. QE thinning still applies (use qe = 1 to keep
/// every photon); pixelation, clustering and jitter do not.
std::vector<DetectionEvent> detect_ideal(std::span<const CameraPhoton> photons,
                                         const CameraParams& params, std::uint8_t cam_id,
                                         std::uint64_t seed, DetectReport* report = nullptr);

struct CentroidParams {
  int gap_px = 1;           ///< spatial connectivity radius (1 = 8-connectivity)
  double window_ns = 100.0; ///< max time distance within a cluster
  double time_skew_ns = 5.0;  ///< skew constant used to invert the timing model
  double amplitude_gain = 100.0;
};

/// Groups hits into spatio-temporal clusters and reduces each to one event:
/// amplitude-weighted centroid, timestamp of the brightest pixel with the
/// modeled intensity skew added back. Input may be unsorted.
std::vector<DetectionEvent> cluster_and_centroid(std::vector<RawPixelHit> hits,
                                                 const CentroidParams& params);

}  // namespace qclfm
