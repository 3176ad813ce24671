#pragma once

#include <memory>
#include <optional>

#include "qclfm/coincidence.hpp"
#include "qclfm/config.hpp"
#include "qclfm/metrics.hpp"
#include "qclfm/volumetric.hpp"

namespace qclfm {

struct SimulationSummary {
  std::size_t pairs_generated = 0;
  std::size_t scene_absorbed = 0;
  std::size_t signal_na_rejected = 0;
  std::size_t idler_na_rejected = 0;
  std::size_t signal_detected = 0;
  std::size_t idler_detected = 0;
  std::size_t signal_off_sensor = 0;
  std::size_t idler_off_sensor = 0;
  std::size_t coincidence_capable = 0;  ///< pairs with both photons detected
  double duration_s = 0.0;
  double scene_throughput = 1.0;
  std::uint64_t seed = 0;
};

struct SimulationOutput {
  std::vector<DetectionEvent> events;  ///< merged, time-sorted
  SimulationSummary summary;
  std::vector<PhotonPairEvent> truth;  ///< kept only on request
};

struct SimulateOptions {
  /// Fixed pair count; 0 draws Poisson(rate * duration).
  std::size_t pair_count_override = 0;
  bool keep_truth = false;
};

/// Full forward model: pair generation, scene interaction, arm mapping,
/// camera detection, event merge. Deterministic in (config.seed, duration).
SimulationOutput simulate(const ExperimentConfig& config, double duration_s,
                          const SimulateOptions& options = {});

/// Scene construction from the config descriptor; empty for scene "none".
/// usaf_elements receives chart geometry when the scene is a USAF target.
std::optional<VolumetricScene> build_scene(const ExperimentConfig& config,
                                           std::vector<UsafElement>* usaf_elements = nullptr);

Calibration calibration_from(const ExperimentConfig& config);
IdlerRegion idler_region_from(const ExperimentConfig& config);

/// Pairing plus coordinate conversion: the reconstruction-facing records.
std::vector<CoincidenceRecord> coincidence_records(std::span<const DetectionEvent> events,
                                                   const ExperimentConfig& config);

struct ReconstructOutput {
  ShiftedSumImage shifted;
  RetrievalResult retrieval;
  std::size_t pairs = 0;
};

/// simulate-file -> records -> ray-trace -> retrieval, at one depth.
ReconstructOutput reconstruct(std::span<const DetectionEvent> events,
                              const ExperimentConfig& config, double z_um, int iterations);

struct DofRunPoint {
  double z_um = 0.0;
  ResolvabilityReport report;
};

/// Re-simulates the configured USAF scene at each depth of the configured
/// sweep, refocuses at that same depth, and scores resolvability.
std::vector<DofRunPoint> run_dof_curve(const ExperimentConfig& config, double duration_s,
                                       std::size_t pairs_per_depth);

}  // namespace qclfm
