#include "qclfm/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "qclfm/io.hpp"

namespace qclfm {

namespace {

double pair_wavelength_um(const ExperimentConfig& cfg) {
  return 2.0 * cfg.source.pump.wavelength_um;
}

ComplexField half_plane_mask(const SceneConfig& scene, double lambda_um) {
  ComplexField t(scene.grid.size_px, scene.grid.size_px, scene.grid.pitch_um, lambda_um);
  for (int iy = 0; iy < t.height(); ++iy) {
    for (int ix = 0; ix < t.width(); ++ix) {
      double coord = scene.half_plane_axis == 'x' ? t.x_um(ix) : t.y_um(iy);
      bool positive = coord >= scene.half_plane_edge_um;
      bool open = positive == scene.half_plane_transmissive_positive;
      t.at(ix, iy) = open ? 1.0 : 0.0;
    }
  }
  return t;
}

void sort_events(std::vector<DetectionEvent>& events) {
  std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
    if (a.cam != b.cam) return a.cam < b.cam;
    if (a.y_px != b.y_px) return a.y_px < b.y_px;
    return a.x_px < b.x_px;
  });
}

}  // namespace

std::optional<VolumetricScene> build_scene(const ExperimentConfig& config,
                                           std::vector<UsafElement>* usaf_elements) {
  const SceneConfig& sc = config.scene;
  const double lambda = pair_wavelength_um(config);
  switch (sc.type) {
    case SceneConfig::Type::kNone:
      return std::nullopt;
    case SceneConfig::Type::kUsaf: {
      if (sc.usaf_items.empty()) throw ConfigError("usaf scene has no elements");
      UsafTarget target = usaf_chart(sc.usaf_items, sc.grid.pitch_um, sc.grid.size_px, lambda);
      if (usaf_elements) *usaf_elements = target.elements;
      target.target.z_offset_um = sc.z_um;
      target.target.fourier_plane = sc.fourier_plane;
      target.target.fourier_scale_um_per_k = sc.fourier_scale_um_per_k;
      VolumetricScene scene;
      scene.slices.push_back(std::move(target.target));
      return scene;
    }
    case SceneConfig::Type::kFibers: {
      if (sc.fourier_plane) throw ConfigError("fiber scenes must sit in image space");
      if (!sc.fiber_strands.empty()) {
        return fiber_scene(sc.fiber_strands, sc.grid, lambda);
      }
      return fiber_phantom(sc.fiber_count, sc.fiber_diameter_min_um, sc.fiber_diameter_max_um,
                           sc.fiber_z_min_um, sc.fiber_z_max_um, sc.fiber_seed, sc.grid, lambda);
    }
    case SceneConfig::Type::kFld1: {
      if (sc.fld1_path.empty()) throw ConfigError("fld1 scene needs a path");
      ComplexField loaded = io::read_fld1(sc.fld1_path);
      ComplexField t(loaded.width(), loaded.height(), loaded.pitch_um(), lambda);
      std::copy(loaded.values().begin(), loaded.values().end(), t.values().begin());
      VolumetricScene scene;
      scene.slices.push_back(
          SceneTarget{std::move(t), sc.z_um, sc.fourier_plane, sc.fourier_scale_um_per_k});
      return scene;
    }
    case SceneConfig::Type::kHalfPlane: {
      VolumetricScene scene;
      scene.slices.push_back(SceneTarget{half_plane_mask(sc, lambda), sc.z_um, sc.fourier_plane,
                                         sc.fourier_scale_um_per_k});
      return scene;
    }
  }
  return std::nullopt;
}

Calibration calibration_from(const ExperimentConfig& config) {
  Calibration cal;
  const CameraParams& sig_cam = config.detector.signal_camera;
  cal.signal_magnification = config.signal_arm.magnification;
  cal.signal_pitch_um = sig_cam.pitch_um;
  cal.signal_center_px = {0.5 * sig_cam.width_px, 0.5 * sig_cam.height_px};
  cal.signal_plane_fourier = config.signal_arm.plane_fourier;
  cal.signal_k_per_px = config.signal_arm.k_per_px;
  cal.idler_k_per_px = config.idler_arm.k_per_px;
  if (config.detector.single_camera) {
    const IdlerRegionConfig& r = config.detector.idler_region;
    cal.idler_center_px = {r.x0 + 0.5 * r.width, r.y0 + 0.5 * r.height};
  } else {
    const CameraParams& idl_cam = config.detector.idler_camera;
    cal.idler_center_px = {0.5 * idl_cam.width_px, 0.5 * idl_cam.height_px};
  }
  return cal;
}

IdlerRegion idler_region_from(const ExperimentConfig& config) {
  IdlerRegion region;
  if (config.detector.single_camera) {
    region.dual_camera = false;
    region.x0 = config.detector.idler_region.x0;
    region.y0 = config.detector.idler_region.y0;
    region.width = config.detector.idler_region.width;
    region.height = config.detector.idler_region.height;
  } else {
    region.dual_camera = true;
    region.idler_cam = 1;
  }
  return region;
}

SimulationOutput simulate(const ExperimentConfig& config, double duration_s,
                          const SimulateOptions& options) {
  SimulationOutput out;
  out.summary.duration_s = duration_s;
  out.summary.seed = config.seed;

  std::size_t n = options.pair_count_override;
  if (n == 0) {
    if (duration_s < 0.0) throw ConfigError("simulate: negative duration");
    Rng rng(derive_seed(config.seed, 0xd09a));
    double mean = config.source.pump.pair_rate_per_s * duration_s;
    n = mean > 0.0 ? static_cast<std::size_t>(rng.poisson(mean)) : 0;
  }
  out.summary.pairs_generated = n;
  if (n == 0) return out;

  SourceModel source{config.source.pump, config.source.sigma_single_k,
                     config.source.position_blur_um};
  auto pairs = sample_pairs(source, n, derive_seed(config.seed, 1), duration_s);

  std::optional<ScenePropagator> propagator;
  if (auto scene = build_scene(config)) {
    if (config.signal_arm.plane_fourier) {
      throw ConfigError("a scene requires the signal arm to image the sample plane");
    }
    propagator.emplace(std::move(*scene),
                       config.scene.illumination,
                       SceneSamplerOptions{config.reconstruction.momentum_bin_k,
                                           config.reconstruction.exact_tilt});
    out.summary.scene_throughput = propagator->throughput();
  }

  // signal-arm landing positions in the sample plane (image-plane arms)
  std::vector<std::optional<Vec2>> positions(pairs.size());
  if (!config.signal_arm.plane_fourier) {
    if (propagator) {
      positions = propagator->sample_batch(pairs, derive_seed(config.seed, 2));
      if (config.source.position_blur_um > 0.0 &&
          config.scene.type != SceneConfig::Type::kNone && config.scene.fourier_plane) {
        for (std::size_t i = 0; i < positions.size(); ++i) {
          if (!positions[i]) continue;
          SmallRng rng(derive_seed(config.seed ^ 0xb1a2, i));
          positions[i]->x += rng.normal(0.0, config.source.position_blur_um);
          positions[i]->y += rng.normal(0.0, config.source.position_blur_um);
        }
      }
    } else {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        Vec2 p = pairs[i].r_um;
        if (config.source.position_blur_um > 0.0) {
          SmallRng rng(derive_seed(config.seed ^ 0xb1a2, i));
          p.x += rng.normal(0.0, config.source.position_blur_um);
          p.y += rng.normal(0.0, config.source.position_blur_um);
        }
        positions[i] = p;
      }
    }
  }

  const double k_total = 2.0 * M_PI / pair_wavelength_um(config);
  const double k_cut = config.detector.na_cut * k_total;
  const Calibration cal = calibration_from(config);
  const CameraParams& sig_cam = config.detector.signal_camera;
  const CameraParams& idl_cam =
      config.detector.single_camera ? config.detector.signal_camera : config.detector.idler_camera;

  std::vector<CameraPhoton> signal_photons, idler_photons;
  std::vector<std::size_t> signal_pair, idler_pair;
  signal_photons.reserve(pairs.size());
  idler_photons.reserve(pairs.size());

  double idler_offset_x_um = 0.0, idler_offset_y_um = 0.0;
  if (config.detector.single_camera) {
    idler_offset_x_um = (cal.idler_center_px.x - 0.5 * sig_cam.width_px) * sig_cam.pitch_um;
    idler_offset_y_um = (cal.idler_center_px.y - 0.5 * sig_cam.height_px) * sig_cam.pitch_um;
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PhotonPairEvent& pe = pairs[i];

    if (pe.k_signal.norm() > k_cut) {
      ++out.summary.signal_na_rejected;
    } else if (config.signal_arm.plane_fourier) {
      CameraPhoton p;
      p.x_um = pe.k_signal.x / cal.signal_k_per_px * sig_cam.pitch_um;
      p.y_um = pe.k_signal.y / cal.signal_k_per_px * sig_cam.pitch_um;
      p.t_ns = pe.t_ns;
      signal_photons.push_back(p);
      signal_pair.push_back(i);
    } else if (positions[i]) {
      CameraPhoton p;
      p.x_um = positions[i]->x * cal.signal_magnification;
      p.y_um = positions[i]->y * cal.signal_magnification;
      p.t_ns = pe.t_ns;
      signal_photons.push_back(p);
      signal_pair.push_back(i);
    } else {
      ++out.summary.scene_absorbed;
    }

    if (pe.k_idler.norm() > k_cut) {
      ++out.summary.idler_na_rejected;
    } else {
      CameraPhoton p;
      p.x_um = pe.k_idler.x / cal.idler_k_per_px * idl_cam.pitch_um + idler_offset_x_um;
      p.y_um = pe.k_idler.y / cal.idler_k_per_px * idl_cam.pitch_um + idler_offset_y_um;
      p.t_ns = pe.t_ns;
      idler_photons.push_back(p);
      idler_pair.push_back(i);
    }
  }

  std::vector<bool> signal_ok(pairs.size(), false), idler_ok(pairs.size(), false);
  auto run_camera = [&](std::span<const CameraPhoton> photons, const CameraParams& cam,
                        std::uint8_t cam_id, std::uint64_t seed, std::span<const std::size_t> map,
                        std::vector<bool>& ok_flags, std::size_t& detected,
                        std::size_t& off_sensor) {
    DetectReport report;
    std::vector<DetectionEvent> events;
    if (cam.ideal) {
      events = detect_ideal(photons, cam, cam_id, seed, &report);
    } else {
      auto hits = detect(photons, cam, cam_id, seed, duration_s, &report);
      CentroidParams cp;
      cp.time_skew_ns = cam.cluster.time_skew_ns;
      cp.amplitude_gain = cam.cluster.amplitude_gain;
      events = cluster_and_centroid(std::move(hits), cp);
    }
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (report.detected[i]) ok_flags[map[i]] = true;
    }
    detected += events.size();
    off_sensor += report.off_sensor;
    out.events.insert(out.events.end(), events.begin(), events.end());
  };

  if (config.detector.single_camera) {
    // one sensor sees both beams; concatenate so clusters can overlap
    std::vector<CameraPhoton> all(signal_photons);
    all.insert(all.end(), idler_photons.begin(), idler_photons.end());
    DetectReport report;
    std::vector<DetectionEvent> events;
    std::uint64_t seed = derive_seed(config.seed, 3);
    if (sig_cam.ideal) {
      events = detect_ideal(all, sig_cam, 0, seed, &report);
    } else {
      auto hits = detect(all, sig_cam, 0, seed, duration_s, &report);
      CentroidParams cp;
      cp.time_skew_ns = sig_cam.cluster.time_skew_ns;
      cp.amplitude_gain = sig_cam.cluster.amplitude_gain;
      events = cluster_and_centroid(std::move(hits), cp);
    }
    for (std::size_t i = 0; i < signal_pair.size(); ++i) {
      if (report.detected[i]) signal_ok[signal_pair[i]] = true;
    }
    for (std::size_t i = 0; i < idler_pair.size(); ++i) {
      if (report.detected[signal_pair.size() + i]) idler_ok[idler_pair[i]] = true;
    }
    out.summary.signal_detected = events.size();
    out.summary.signal_off_sensor = report.off_sensor;
    out.events = std::move(events);
  } else {
    run_camera(signal_photons, sig_cam, 0, derive_seed(config.seed, 3), signal_pair, signal_ok,
               out.summary.signal_detected, out.summary.signal_off_sensor);
    run_camera(idler_photons, idl_cam, 1, derive_seed(config.seed, 4), idler_pair, idler_ok,
               out.summary.idler_detected, out.summary.idler_off_sensor);
  }
  sort_events(out.events);

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (signal_ok[i] && idler_ok[i]) ++out.summary.coincidence_capable;
  }
  if (options.keep_truth) out.truth = std::move(pairs);
  return out;
}

std::vector<CoincidenceRecord> coincidence_records(std::span<const DetectionEvent> events,
                                                   const ExperimentConfig& config) {
  auto pairs = pair_events(events, config.reconstruction.gate_ns, idler_region_from(config));
  return to_sample_plane(pairs, calibration_from(config));
}

ReconstructOutput reconstruct(std::span<const DetectionEvent> events,
                              const ExperimentConfig& config, double z_um, int iterations) {
  ReconstructOutput out;
  auto records = coincidence_records(events, config);
  out.pairs = records.size();
  RefocusOptions ropts;
  ropts.smoothing_sigma_px = config.reconstruction.smoothing_sigma_px;
  ropts.bilinear = config.reconstruction.bilinear;
  out.shifted = ray_trace_refocus(records, z_um, config.reconstruction.grid,
                                  pair_wavelength_um(config), ropts);
  GsOptions gopts;
  gopts.iterations = iterations;
  out.retrieval = gs_retrieve(out.shifted, z_um, gopts);
  return out;
}

std::vector<DofRunPoint> run_dof_curve(const ExperimentConfig& config, double duration_s,
                                       std::size_t pairs_per_depth) {
  if (config.scene.type != SceneConfig::Type::kUsaf) {
    throw ConfigError("run_dof_curve: the scene must be a usaf chart");
  }
  const ReconstructionConfig& rc = config.reconstruction;
  if (!(rc.z_step_um > 0.0) || rc.z_min_um > rc.z_max_um) {
    throw ConfigError("run_dof_curve: invalid z sweep");
  }

  std::vector<DofRunPoint> points;
  for (double z = rc.z_min_um; z <= rc.z_max_um + 1e-9 * rc.z_step_um; z += rc.z_step_um) {
    ExperimentConfig cfg = config;
    cfg.scene.z_um = z;
    std::vector<UsafElement> elements;
    build_scene(cfg, &elements);  // geometry only; simulate() rebuilds internally

    SimulateOptions opts;
    opts.pair_count_override = pairs_per_depth;
    auto sim = simulate(cfg, duration_s, opts);
    auto rec = reconstruct(sim.events, cfg, z, rc.iterations);

    std::vector<double> amplitude(rc.grid.size());
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
      amplitude[i] = std::abs(rec.retrieval.sample.values()[i]);
    }
    DofRunPoint pt;
    pt.z_um = z;
    pt.report = resolvability(amplitude, rc.grid, elements, rc.threshold);
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace qclfm
