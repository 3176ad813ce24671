#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qclfm/detector.hpp"
#include "qclfm/rays.hpp"
#include "qclfm/refocus.hpp"
#include "qclfm/scene.hpp"
#include "qclfm/spdc.hpp"

namespace qclfm {

struct SourceConfig {
  PumpParams pump;
  double sigma_single_k = 0.171;
  double position_blur_um = 0.0;
};

struct ArmConfig {
  bool plane_fourier = false;   ///< arm images the crystal Fourier plane
  double magnification = 20.0;  ///< image-plane arms
  double k_per_px = 13.7e-3;    ///< Fourier-plane arms: momentum per camera pixel
  std::vector<OpticalElement> elements;  ///< declarative optics, validated on load
};

struct IdlerRegionConfig {
  int x0 = 156, y0 = 156, width = 100, height = 100;
};

struct DetectorConfig {
  bool single_camera = false;
  double na_cut = 0.45;  ///< objective momentum acceptance, |k| <= NA * 2pi/lambda
  CameraParams signal_camera;
  CameraParams idler_camera;
  IdlerRegionConfig idler_region;  ///< single-camera mode only
};

struct SceneConfig {
  enum class Type { kNone, kUsaf, kFibers, kFld1, kHalfPlane };
  Type type = Type::kNone;
  double z_um = 0.0;
  bool fourier_plane = false;
  double fourier_scale_um_per_k = 1000.0;
  SceneGrid grid;
  Illumination illumination;

  std::vector<std::pair<int, int>> usaf_items;

  std::vector<FiberSpec> fiber_strands;  ///< explicit strands; else random below
  int fiber_count = 0;
  double fiber_diameter_min_um = 5.0;
  double fiber_diameter_max_um = 10.0;
  double fiber_z_min_um = -1500.0;
  double fiber_z_max_um = 1500.0;
  std::uint64_t fiber_seed = 1;

  std::string fld1_path;

  char half_plane_axis = 'x';
  double half_plane_edge_um = 0.0;
  bool half_plane_transmissive_positive = true;
};

struct ReconstructionConfig {
  GridSpec grid;
  double gate_ns = 10.0;
  int iterations = 10;
  double z_um = 0.0;
  double z_min_um = 0.0;
  double z_max_um = 0.0;
  double z_step_um = 100.0;
  double smoothing_sigma_px = 0.5;
  bool bilinear = false;
  double momentum_bin_k = 13.7e-3;
  bool exact_tilt = false;
  double threshold = 0.2;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  SourceConfig source;
  ArmConfig signal_arm;
  ArmConfig idler_arm{true, 1.0, 13.7e-3, {}};
  DetectorConfig detector;
  SceneConfig scene;
  ReconstructionConfig reconstruction;
};

/// Parses and validates a config. Unknown keys are rejected with a
/// path-addressed message; keys starting with '_' are annotation and ignored.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical serialization; parse(serialize(parse(x))) == parse(x).
std::string serialize_config(const ExperimentConfig& config);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace qclfm
