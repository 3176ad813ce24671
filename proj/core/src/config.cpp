#include "qclfm/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace qclfm {

namespace {

using Json = nlohmann::ordered_json;

void verify_keys(const Json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config error at " + path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!key.empty() && key[0] == '_') continue;  // annotation keys
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("config error at " + path + "/" + key + ": unknown key");
    }
  }
}

double get_num(const Json& j, const std::string& path, const char* key, double def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config error at " + path + "/" + key + ": expected a number");
  return v.get<double>();
}

int get_int(const Json& j, const std::string& path, const char* key, int def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config error at " + path + "/" + key + ": expected an integer");
  }
  return v.get<int>();
}

bool get_bool(const Json& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("config error at " + path + "/" + key + ": expected a bool");
  return v.get<bool>();
}

std::string get_str(const Json& j, const std::string& path, const char* key,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError("config error at " + path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

CameraParams parse_camera(const Json& j, const std::string& path) {
  verify_keys(j, path,
              {"width_px", "height_px", "pitch_um", "clock_ns", "jitter_ns", "qe",
               "dark_rate_per_s", "ideal", "cluster"});
  CameraParams cam;
  cam.width_px = get_int(j, path, "width_px", cam.width_px);
  cam.height_px = get_int(j, path, "height_px", cam.height_px);
  cam.pitch_um = get_num(j, path, "pitch_um", cam.pitch_um);
  cam.clock_ns = get_num(j, path, "clock_ns", cam.clock_ns);
  cam.jitter_ns = get_num(j, path, "jitter_ns", cam.jitter_ns);
  cam.quantum_efficiency = get_num(j, path, "qe", cam.quantum_efficiency);
  cam.dark_rate_per_s = get_num(j, path, "dark_rate_per_s", cam.dark_rate_per_s);
  cam.ideal = get_bool(j, path, "ideal", cam.ideal);
  if (j.contains("cluster")) {
    const auto& c = j.at("cluster");
    std::string cp = path + "/cluster";
    verify_keys(c, cp,
                {"min_size", "max_size", "sigma_x_px", "sigma_y_px", "amplitude_gain",
                 "amplitude_spread", "time_skew_ns"});
    cam.cluster.min_size = get_int(c, cp, "min_size", cam.cluster.min_size);
    cam.cluster.max_size = get_int(c, cp, "max_size", cam.cluster.max_size);
    cam.cluster.sigma_x_px = get_num(c, cp, "sigma_x_px", cam.cluster.sigma_x_px);
    cam.cluster.sigma_y_px = get_num(c, cp, "sigma_y_px", cam.cluster.sigma_y_px);
    cam.cluster.amplitude_gain = get_num(c, cp, "amplitude_gain", cam.cluster.amplitude_gain);
    cam.cluster.amplitude_spread = get_num(c, cp, "amplitude_spread", cam.cluster.amplitude_spread);
    cam.cluster.time_skew_ns = get_num(c, cp, "time_skew_ns", cam.cluster.time_skew_ns);
  }
  if (cam.width_px < 2 || cam.height_px < 2) {
    throw ConfigError("config error at " + path + ": camera must be at least 2x2 pixels");
  }
  if (!(cam.pitch_um > 0.0) || !(cam.clock_ns > 0.0)) {
    throw ConfigError("config error at " + path + ": pitch and clock must be positive");
  }
  if (!(cam.quantum_efficiency > 0.0) || cam.quantum_efficiency > 1.0) {
    throw ConfigError("config error at " + path + ": qe must be in (0, 1]");
  }
  return cam;
}

Json dump_camera(const CameraParams& cam) {
  Json j;
  j["width_px"] = cam.width_px;
  j["height_px"] = cam.height_px;
  j["pitch_um"] = cam.pitch_um;
  j["clock_ns"] = cam.clock_ns;
  j["jitter_ns"] = cam.jitter_ns;
  j["qe"] = cam.quantum_efficiency;
  j["dark_rate_per_s"] = cam.dark_rate_per_s;
  j["ideal"] = cam.ideal;
  j["cluster"] = Json{{"min_size", cam.cluster.min_size},
                      {"max_size", cam.cluster.max_size},
                      {"sigma_x_px", cam.cluster.sigma_x_px},
                      {"sigma_y_px", cam.cluster.sigma_y_px},
                      {"amplitude_gain", cam.cluster.amplitude_gain},
                      {"amplitude_spread", cam.cluster.amplitude_spread},
                      {"time_skew_ns", cam.cluster.time_skew_ns}};
  return j;
}

std::vector<OpticalElement> parse_elements(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("config error at " + path + ": expected an array");
  std::vector<OpticalElement> elements;
  int i = 0;
  for (const auto& e : j) {
    std::string ep = path + "/" + std::to_string(i++);
    verify_keys(e, ep, {"type", "d_um", "f_um"});
    std::string type = get_str(e, ep, "type", "");
    if (type == "free_space") {
      elements.push_back(OpticalElement::free_space(get_num(e, ep, "d_um", 0.0)));
    } else if (type == "thin_lens") {
      double f = get_num(e, ep, "f_um", 0.0);
      if (f == 0.0) throw ConfigError("config error at " + ep + ": thin lens needs f_um != 0");
      elements.push_back(OpticalElement::thin_lens(f));
    } else {
      throw ConfigError("config error at " + ep + ": unknown element type '" + type + "'");
    }
  }
  return elements;
}

Json dump_elements(const std::vector<OpticalElement>& elements) {
  Json arr = Json::array();
  for (const auto& e : elements) {
    if (e.kind == OpticalElement::Kind::kFreeSpace) {
      arr.push_back(Json{{"type", "free_space"}, {"d_um", e.value_um}});
    } else {
      arr.push_back(Json{{"type", "thin_lens"}, {"f_um", e.value_um}});
    }
  }
  return arr;
}

ArmConfig parse_arm(const Json& j, const std::string& path, bool default_fourier) {
  verify_keys(j, path, {"plane", "magnification", "k_per_pixel_per_um", "elements"});
  ArmConfig arm;
  arm.plane_fourier = default_fourier;
  std::string plane = get_str(j, path, "plane", default_fourier ? "fourier" : "image");
  if (plane == "image") {
    arm.plane_fourier = false;
  } else if (plane == "fourier") {
    arm.plane_fourier = true;
  } else {
    throw ConfigError("config error at " + path + "/plane: must be 'image' or 'fourier'");
  }
  arm.magnification = get_num(j, path, "magnification", arm.magnification);
  arm.k_per_px = get_num(j, path, "k_per_pixel_per_um", arm.k_per_px);
  if (!(arm.magnification > 0.0)) {
    throw ConfigError("config error at " + path + ": magnification must be positive");
  }
  if (!(arm.k_per_px > 0.0)) {
    throw ConfigError("config error at " + path + ": k_per_pixel_per_um must be positive");
  }
  if (j.contains("elements")) arm.elements = parse_elements(j.at("elements"), path + "/elements");
  if (!arm.elements.empty()) compose(arm.elements);  // validates focal lengths
  return arm;
}

Json dump_arm(const ArmConfig& arm) {
  Json j;
  j["plane"] = arm.plane_fourier ? "fourier" : "image";
  j["magnification"] = arm.magnification;
  j["k_per_pixel_per_um"] = arm.k_per_px;
  j["elements"] = dump_elements(arm.elements);
  return j;
}

Illumination parse_illumination(const Json& j, const std::string& path) {
  verify_keys(j, path, {"type", "waist_um"});
  Illumination illum;
  std::string type = get_str(j, path, "type", "uniform");
  if (type == "uniform") {
    illum.kind = Illumination::Kind::kUniform;
  } else if (type == "gaussian") {
    illum.kind = Illumination::Kind::kGaussian;
    illum.waist_um = get_num(j, path, "waist_um", 0.0);
    if (!(illum.waist_um > 0.0)) {
      throw ConfigError("config error at " + path + ": gaussian illumination needs waist_um > 0");
    }
  } else {
    throw ConfigError("config error at " + path + "/type: unknown illumination '" + type + "'");
  }
  return illum;
}

SceneConfig parse_scene(const Json& j, const std::string& path) {
  verify_keys(j, path,
              {"type", "z_um", "plane", "fourier_scale_um_per_k", "grid", "illumination", "usaf",
               "fibers", "fld1_path", "half_plane"});
  SceneConfig scene;
  std::string type = get_str(j, path, "type", "none");
  if (type == "none") {
    scene.type = SceneConfig::Type::kNone;
  } else if (type == "usaf") {
    scene.type = SceneConfig::Type::kUsaf;
  } else if (type == "fibers") {
    scene.type = SceneConfig::Type::kFibers;
  } else if (type == "fld1") {
    scene.type = SceneConfig::Type::kFld1;
  } else if (type == "half_plane") {
    scene.type = SceneConfig::Type::kHalfPlane;
  } else {
    throw ConfigError("config error at " + path + "/type: unknown scene type '" + type + "'");
  }
  scene.z_um = get_num(j, path, "z_um", 0.0);
  std::string plane = get_str(j, path, "plane", "image");
  if (plane == "fourier") {
    scene.fourier_plane = true;
  } else if (plane != "image") {
    throw ConfigError("config error at " + path + "/plane: must be 'image' or 'fourier'");
  }
  scene.fourier_scale_um_per_k = get_num(j, path, "fourier_scale_um_per_k",
                                         scene.fourier_scale_um_per_k);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    verify_keys(g, path + "/grid", {"size_px", "pitch_um"});
    scene.grid.size_px = get_int(g, path + "/grid", "size_px", scene.grid.size_px);
    scene.grid.pitch_um = get_num(g, path + "/grid", "pitch_um", scene.grid.pitch_um);
  }
  if (j.contains("illumination")) {
    scene.illumination = parse_illumination(j.at("illumination"), path + "/illumination");
  }
  if (j.contains("usaf")) {
    const auto& u = j.at("usaf");
    verify_keys(u, path + "/usaf", {"items"});
    if (!u.contains("items") || !u.at("items").is_array()) {
      throw ConfigError("config error at " + path + "/usaf: needs an items array");
    }
    int i = 0;
    for (const auto& item : u.at("items")) {
      std::string ip = path + "/usaf/items/" + std::to_string(i++);
      verify_keys(item, ip, {"group", "element"});
      scene.usaf_items.emplace_back(get_int(item, ip, "group", 0), get_int(item, ip, "element", 1));
    }
  }
  if (j.contains("fibers")) {
    const auto& f = j.at("fibers");
    std::string fp = path + "/fibers";
    verify_keys(f, fp,
                {"strands", "n", "diameter_min_um", "diameter_max_um", "z_min_um", "z_max_um",
                 "seed"});
    if (f.contains("strands")) {
      int i = 0;
      for (const auto& s : f.at("strands")) {
        std::string sp = fp + "/strands/" + std::to_string(i++);
        verify_keys(s, sp, {"x_um", "y_um", "angle_deg", "width_um", "z_um"});
        FiberSpec spec;
        spec.center_um = {get_num(s, sp, "x_um", 0.0), get_num(s, sp, "y_um", 0.0)};
        spec.angle_rad = get_num(s, sp, "angle_deg", 0.0) * M_PI / 180.0;
        spec.width_um = get_num(s, sp, "width_um", 5.0);
        spec.z_um = get_num(s, sp, "z_um", 0.0);
        scene.fiber_strands.push_back(spec);
      }
    }
    scene.fiber_count = get_int(f, fp, "n", 0);
    scene.fiber_diameter_min_um = get_num(f, fp, "diameter_min_um", scene.fiber_diameter_min_um);
    scene.fiber_diameter_max_um = get_num(f, fp, "diameter_max_um", scene.fiber_diameter_max_um);
    scene.fiber_z_min_um = get_num(f, fp, "z_min_um", scene.fiber_z_min_um);
    scene.fiber_z_max_um = get_num(f, fp, "z_max_um", scene.fiber_z_max_um);
    scene.fiber_seed = static_cast<std::uint64_t>(get_num(f, fp, "seed", 1));
  }
  scene.fld1_path = get_str(j, path, "fld1_path", "");
  if (j.contains("half_plane")) {
    const auto& h = j.at("half_plane");
    std::string hp = path + "/half_plane";
    verify_keys(h, hp, {"axis", "edge_um", "transmissive"});
    std::string axis = get_str(h, hp, "axis", "x");
    if (axis != "x" && axis != "y") {
      throw ConfigError("config error at " + hp + "/axis: must be 'x' or 'y'");
    }
    scene.half_plane_axis = axis[0];
    scene.half_plane_edge_um = get_num(h, hp, "edge_um", 0.0);
    std::string side = get_str(h, hp, "transmissive", "positive");
    if (side == "positive") {
      scene.half_plane_transmissive_positive = true;
    } else if (side == "negative") {
      scene.half_plane_transmissive_positive = false;
    } else {
      throw ConfigError("config error at " + hp + "/transmissive: must be positive or negative");
    }
  }
  return scene;
}

Json dump_scene(const SceneConfig& scene) {
  Json j;
  switch (scene.type) {
    case SceneConfig::Type::kNone: j["type"] = "none"; break;
    case SceneConfig::Type::kUsaf: j["type"] = "usaf"; break;
    case SceneConfig::Type::kFibers: j["type"] = "fibers"; break;
    case SceneConfig::Type::kFld1: j["type"] = "fld1"; break;
    case SceneConfig::Type::kHalfPlane: j["type"] = "half_plane"; break;
  }
  j["z_um"] = scene.z_um;
  j["plane"] = scene.fourier_plane ? "fourier" : "image";
  j["fourier_scale_um_per_k"] = scene.fourier_scale_um_per_k;
  j["grid"] = Json{{"size_px", scene.grid.size_px}, {"pitch_um", scene.grid.pitch_um}};
  if (scene.illumination.kind == Illumination::Kind::kUniform) {
    j["illumination"] = Json{{"type", "uniform"}};
  } else {
    j["illumination"] = Json{{"type", "gaussian"}, {"waist_um", scene.illumination.waist_um}};
  }
  if (scene.type == SceneConfig::Type::kUsaf) {
    Json items = Json::array();
    for (auto [g, e] : scene.usaf_items) items.push_back(Json{{"group", g}, {"element", e}});
    j["usaf"] = Json{{"items", items}};
  }
  if (scene.type == SceneConfig::Type::kFibers) {
    Json f;
    if (!scene.fiber_strands.empty()) {
      Json strands = Json::array();
      for (const auto& s : scene.fiber_strands) {
        strands.push_back(Json{{"x_um", s.center_um.x},
                               {"y_um", s.center_um.y},
                               {"angle_deg", s.angle_rad * 180.0 / M_PI},
                               {"width_um", s.width_um},
                               {"z_um", s.z_um}});
      }
      f["strands"] = strands;
    } else {
      f["n"] = scene.fiber_count;
      f["diameter_min_um"] = scene.fiber_diameter_min_um;
      f["diameter_max_um"] = scene.fiber_diameter_max_um;
      f["z_min_um"] = scene.fiber_z_min_um;
      f["z_max_um"] = scene.fiber_z_max_um;
      f["seed"] = static_cast<double>(scene.fiber_seed);
    }
    j["fibers"] = f;
  }
  if (scene.type == SceneConfig::Type::kFld1) j["fld1_path"] = scene.fld1_path;
  if (scene.type == SceneConfig::Type::kHalfPlane) {
    j["half_plane"] = Json{{"axis", std::string(1, scene.half_plane_axis)},
                           {"edge_um", scene.half_plane_edge_um},
                           {"transmissive", scene.half_plane_transmissive_positive
                                                ? "positive"
                                                : "negative"}};
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config JSON parse failure: ") + e.what());
  }
  verify_keys(j, "", {"seed", "source", "arms", "detector", "scene", "reconstruction"});

  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(get_num(j, "", "seed", 1));

  if (j.contains("source")) {
    const auto& s = j.at("source");
    verify_keys(s, "/source",
                {"l_c_um", "omega_p_um", "pump_wavelength_um", "pair_rate_per_s",
                 "crystal_aperture_um", "sigma_single_k_per_um", "position_blur_um"});
    cfg.source.pump.coherence_length_um = get_num(s, "/source", "l_c_um", 200.0);
    cfg.source.pump.waist_um = get_num(s, "/source", "omega_p_um", 500.0);
    cfg.source.pump.wavelength_um = get_num(s, "/source", "pump_wavelength_um", 0.405);
    cfg.source.pump.pair_rate_per_s = get_num(s, "/source", "pair_rate_per_s", 15.0e6);
    cfg.source.pump.crystal_aperture_um = get_num(s, "/source", "crystal_aperture_um", 2000.0);
    cfg.source.sigma_single_k = get_num(s, "/source", "sigma_single_k_per_um", 0.171);
    cfg.source.position_blur_um = get_num(s, "/source", "position_blur_um", 0.0);
    momentum_sigma(cfg.source.pump);  // validates
  }

  if (j.contains("arms")) {
    const auto& a = j.at("arms");
    verify_keys(a, "/arms", {"signal", "idler"});
    if (a.contains("signal")) cfg.signal_arm = parse_arm(a.at("signal"), "/arms/signal", false);
    if (a.contains("idler")) cfg.idler_arm = parse_arm(a.at("idler"), "/arms/idler", true);
  }
  if (!cfg.idler_arm.plane_fourier) {
    throw ConfigError("config error at /arms/idler: the idler arm must image the Fourier plane");
  }

  if (j.contains("detector")) {
    const auto& d = j.at("detector");
    verify_keys(d, "/detector",
                {"mode", "na_cut", "signal_camera", "idler_camera", "idler_region"});
    std::string mode = get_str(d, "/detector", "mode", "dual");
    if (mode == "single") {
      cfg.detector.single_camera = true;
    } else if (mode != "dual") {
      throw ConfigError("config error at /detector/mode: must be 'single' or 'dual'");
    }
    cfg.detector.na_cut = get_num(d, "/detector", "na_cut", 0.45);
    if (d.contains("signal_camera")) {
      cfg.detector.signal_camera = parse_camera(d.at("signal_camera"), "/detector/signal_camera");
    }
    if (d.contains("idler_camera")) {
      if (cfg.detector.single_camera) {
        throw ConfigError("config error at /detector/idler_camera: not valid in single-camera mode");
      }
      cfg.detector.idler_camera = parse_camera(d.at("idler_camera"), "/detector/idler_camera");
    }
    if (d.contains("idler_region")) {
      if (!cfg.detector.single_camera) {
        throw ConfigError("config error at /detector/idler_region: only valid in single-camera mode");
      }
      const auto& r = d.at("idler_region");
      verify_keys(r, "/detector/idler_region", {"x0", "y0", "width", "height"});
      cfg.detector.idler_region.x0 = get_int(r, "/detector/idler_region", "x0", 156);
      cfg.detector.idler_region.y0 = get_int(r, "/detector/idler_region", "y0", 156);
      cfg.detector.idler_region.width = get_int(r, "/detector/idler_region", "width", 100);
      cfg.detector.idler_region.height = get_int(r, "/detector/idler_region", "height", 100);
    }
  }

  if (j.contains("scene")) cfg.scene = parse_scene(j.at("scene"), "/scene");

  if (j.contains("reconstruction")) {
    const auto& r = j.at("reconstruction");
    verify_keys(r, "/reconstruction",
                {"grid", "gate_ns", "iterations", "z_um", "z_min_um", "z_max_um", "z_step_um",
                 "smoothing_sigma_px", "bilinear", "momentum_bin_k_per_um", "exact_tilt",
                 "threshold"});
    if (r.contains("grid")) {
      const auto& g = r.at("grid");
      verify_keys(g, "/reconstruction/grid", {"width_px", "height_px", "pitch_um"});
      cfg.reconstruction.grid.width = get_int(g, "/reconstruction/grid", "width_px", 128);
      cfg.reconstruction.grid.height = get_int(g, "/reconstruction/grid", "height_px", 128);
      cfg.reconstruction.grid.pitch_um = get_num(g, "/reconstruction/grid", "pitch_um", 1.0);
    }
    cfg.reconstruction.gate_ns = get_num(r, "/reconstruction", "gate_ns", 10.0);
    cfg.reconstruction.iterations = get_int(r, "/reconstruction", "iterations", 10);
    cfg.reconstruction.z_um = get_num(r, "/reconstruction", "z_um", 0.0);
    cfg.reconstruction.z_min_um = get_num(r, "/reconstruction", "z_min_um", 0.0);
    cfg.reconstruction.z_max_um = get_num(r, "/reconstruction", "z_max_um", 0.0);
    cfg.reconstruction.z_step_um = get_num(r, "/reconstruction", "z_step_um", 100.0);
    cfg.reconstruction.smoothing_sigma_px = get_num(r, "/reconstruction", "smoothing_sigma_px", 0.5);
    cfg.reconstruction.bilinear = get_bool(r, "/reconstruction", "bilinear", false);
    cfg.reconstruction.momentum_bin_k = get_num(r, "/reconstruction", "momentum_bin_k_per_um",
                                                13.7e-3);
    cfg.reconstruction.exact_tilt = get_bool(r, "/reconstruction", "exact_tilt", false);
    cfg.reconstruction.threshold = get_num(r, "/reconstruction", "threshold", 0.2);
    if (!(cfg.reconstruction.gate_ns > 0.0)) {
      throw ConfigError("config error at /reconstruction/gate_ns: must be positive");
    }
    if (cfg.reconstruction.iterations < 1) {
      throw ConfigError("config error at /reconstruction/iterations: must be >= 1");
    }
    if (cfg.reconstruction.grid.width < 2 || cfg.reconstruction.grid.height < 2 ||
        !(cfg.reconstruction.grid.pitch_um > 0.0)) {
      throw ConfigError("config error at /reconstruction/grid: invalid grid");
    }
  }

  if (cfg.signal_arm.plane_fourier && cfg.scene.type != SceneConfig::Type::kNone) {
    throw ConfigError("config error: a scene cannot be combined with a Fourier-plane signal arm");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(std::move(ss).str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  Json j;
  j["seed"] = static_cast<double>(cfg.seed);
  j["source"] = Json{{"l_c_um", cfg.source.pump.coherence_length_um},
                     {"omega_p_um", cfg.source.pump.waist_um},
                     {"pump_wavelength_um", cfg.source.pump.wavelength_um},
                     {"pair_rate_per_s", cfg.source.pump.pair_rate_per_s},
                     {"crystal_aperture_um", cfg.source.pump.crystal_aperture_um},
                     {"sigma_single_k_per_um", cfg.source.sigma_single_k},
                     {"position_blur_um", cfg.source.position_blur_um}};
  j["arms"] = Json{{"signal", dump_arm(cfg.signal_arm)}, {"idler", dump_arm(cfg.idler_arm)}};
  Json det;
  det["mode"] = cfg.detector.single_camera ? "single" : "dual";
  det["na_cut"] = cfg.detector.na_cut;
  det["signal_camera"] = dump_camera(cfg.detector.signal_camera);
  if (!cfg.detector.single_camera) {
    det["idler_camera"] = dump_camera(cfg.detector.idler_camera);
  } else {
    det["idler_region"] = Json{{"x0", cfg.detector.idler_region.x0},
                               {"y0", cfg.detector.idler_region.y0},
                               {"width", cfg.detector.idler_region.width},
                               {"height", cfg.detector.idler_region.height}};
  }
  j["detector"] = det;
  j["scene"] = dump_scene(cfg.scene);
  j["reconstruction"] =
      Json{{"grid", Json{{"width_px", cfg.reconstruction.grid.width},
                         {"height_px", cfg.reconstruction.grid.height},
                         {"pitch_um", cfg.reconstruction.grid.pitch_um}}},
           {"gate_ns", cfg.reconstruction.gate_ns},
           {"iterations", cfg.reconstruction.iterations},
           {"z_um", cfg.reconstruction.z_um},
           {"z_min_um", cfg.reconstruction.z_min_um},
           {"z_max_um", cfg.reconstruction.z_max_um},
           {"z_step_um", cfg.reconstruction.z_step_um},
           {"smoothing_sigma_px", cfg.reconstruction.smoothing_sigma_px},
           {"bilinear", cfg.reconstruction.bilinear},
           {"momentum_bin_k_per_um", cfg.reconstruction.momentum_bin_k},
           {"exact_tilt", cfg.reconstruction.exact_tilt},
           {"threshold", cfg.reconstruction.threshold}};
  return j.dump(2) + "\n";
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << serialize_config(config);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace qclfm
