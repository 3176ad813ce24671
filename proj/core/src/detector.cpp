#include "qclfm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace qclfm {

namespace {

double quantize_clock(double t_ns, double clock_ns) {
  if (clock_ns <= 0.0) return t_ns;
  double q = std::round(t_ns / clock_ns) * clock_ns;
  return q < 0.0 ? 0.0 : q;
}

bool hit_order(const RawPixelHit& a, const RawPixelHit& b) {
  if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.cam < b.cam;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<RawPixelHit> detect(std::span<const CameraPhoton> photons, const CameraParams& params,
                                std::uint8_t cam_id, std::uint64_t seed, double duration_s,
                                DetectReport* report) {
  const ClusterModel& cm = params.cluster;
  if (cm.min_size < 1 || cm.max_size < cm.min_size) {
    throw ConfigError("cluster size range must satisfy 1 <= min <= max");
  }
  if (!(params.quantum_efficiency > 0.0) || params.quantum_efficiency > 1.0) {
    throw ConfigError("quantum efficiency must be in (0, 1]");
  }

  const double half_w_um = 0.5 * params.width_px * params.pitch_um;
  const double half_h_um = 0.5 * params.height_px * params.pitch_um;

  std::vector<RawPixelHit> hits;
  hits.reserve(photons.size() * (cm.min_size + cm.max_size) / 2 / 8 + 16);
  if (report) {
    report->input = photons.size();
    report->detected.assign(photons.size(), false);
  }

  std::unordered_map<std::uint32_t, std::pair<float, double>> cluster_pixels;
  for (std::size_t i = 0; i < photons.size(); ++i) {
    SmallRng rng(derive_seed(seed, i));
    const CameraPhoton& p = photons[i];
    if (rng.uniform() >= params.quantum_efficiency) continue;
    if (report) ++report->survived_qe;
    if (std::abs(p.x_um) >= half_w_um || std::abs(p.y_um) >= half_h_um) {
      if (report) ++report->off_sensor;
      continue;
    }
    if (report) report->detected[i] = true;

    const double px = p.x_um / params.pitch_um + 0.5 * params.width_px;
    const double py = p.y_um / params.pitch_um + 0.5 * params.height_px;
    // One timing draw per flash; the per-pixel spread comes from the
    // amplitude skew so the brightest pixel is always the earliest.
    const double sigma_eff =
        std::sqrt(std::max(params.jitter_ns * params.jitter_ns -
                               params.clock_ns * params.clock_ns / 12.0,
                           0.0));
    const double t_base = p.t_ns + rng.normal(0.0, sigma_eff);

    const int n_samples = rng.uniform_int(cm.min_size, cm.max_size);
    cluster_pixels.clear();
    for (int s = 0; s < n_samples; ++s) {
      // The first sample anchors the cluster at the flash center.
      double dx = s == 0 ? 0.0 : rng.normal(0.0, cm.sigma_x_px);
      double dy = s == 0 ? 0.0 : rng.normal(0.0, cm.sigma_y_px);
      int ix = static_cast<int>(std::floor(px + dx));
      int iy = static_cast<int>(std::floor(py + dy));
      if (ix < 0 || ix >= params.width_px || iy < 0 || iy >= params.height_px) continue;
      double cx = ix + 0.5 - px;
      double cy = iy + 0.5 - py;
      double w = std::exp(-0.5 * (cx * cx / (cm.sigma_x_px * cm.sigma_x_px) +
                                  cy * cy / (cm.sigma_y_px * cm.sigma_y_px)));
      double amp = cm.amplitude_gain * w * (1.0 + cm.amplitude_spread * rng.uniform(-1.0, 1.0));
      auto key = static_cast<std::uint32_t>(iy) << 16 | static_cast<std::uint32_t>(ix);
      auto [it, fresh] = cluster_pixels.try_emplace(key, 0.0f, 0.0);
      it->second.first += static_cast<float>(amp);
      (void)fresh;
    }
    for (auto& [key, accum] : cluster_pixels) {
      RawPixelHit h;
      h.cam = cam_id;
      h.x = static_cast<std::uint16_t>(key & 0xffff);
      h.y = static_cast<std::uint16_t>(key >> 16);
      h.amplitude = accum.first;
      double skew = cm.time_skew_ns * (accum.first / cm.amplitude_gain);
      h.t_ns = quantize_clock(t_base - skew, params.clock_ns);
      hits.push_back(h);
    }
  }

  if (params.dark_rate_per_s > 0.0 && duration_s > 0.0) {
    Rng rng(derive_seed(seed, 0xda2c));
    auto n_dark = rng.poisson(params.dark_rate_per_s * duration_s);
    for (std::int64_t d = 0; d < n_dark; ++d) {
      RawPixelHit h;
      h.cam = cam_id;
      h.x = static_cast<std::uint16_t>(rng.uniform_int(0, params.width_px - 1));
      h.y = static_cast<std::uint16_t>(rng.uniform_int(0, params.height_px - 1));
      h.amplitude = static_cast<float>(cm.amplitude_gain * rng.uniform(0.5, 1.5));
      h.t_ns = quantize_clock(rng.uniform(0.0, duration_s * 1.0e9), params.clock_ns);
      hits.push_back(h);
      if (report) ++report->dark_events;
    }
  }

  std::sort(hits.begin(), hits.end(), hit_order);
  return hits;
}

std::vector<DetectionEvent> detect_ideal(std::span<const CameraPhoton> photons,
                                         const CameraParams& params, std::uint8_t cam_id,
                                         std::uint64_t seed, DetectReport* report) {
  const double half_w_um = 0.5 * params.width_px * params.pitch_um;
  const double half_h_um = 0.5 * params.height_px * params.pitch_um;
  std::vector<DetectionEvent> events;
  events.reserve(photons.size());
  if (report) {
    report->input = photons.size();
    report->detected.assign(photons.size(), false);
  }
  for (std::size_t i = 0; i < photons.size(); ++i) {
    const CameraPhoton& p = photons[i];
    if (params.quantum_efficiency < 1.0) {
      SmallRng rng(derive_seed(seed, i));
      if (rng.uniform() >= params.quantum_efficiency) continue;
    }
    if (report) ++report->survived_qe;
    if (std::abs(p.x_um) >= half_w_um || std::abs(p.y_um) >= half_h_um) {
      if (report) ++report->off_sensor;
      continue;
    }
    if (report) report->detected[i] = true;
    DetectionEvent e;
    e.cam = cam_id;
    e.x_px = p.x_um / params.pitch_um + 0.5 * params.width_px;
    e.y_px = p.y_um / params.pitch_um + 0.5 * params.height_px;
    e.t_ns = p.t_ns;
    e.cluster_size = 1;
    events.push_back(e);
  }
  std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
    if (a.y_px != b.y_px) return a.y_px < b.y_px;
    return a.x_px < b.x_px;
  });
  return events;
}

std::vector<DetectionEvent> cluster_and_centroid(std::vector<RawPixelHit> hits,
                                                 const CentroidParams& params) {
  if (hits.empty()) return {};
  std::sort(hits.begin(), hits.end(), hit_order);

  // Per-(cam,pixel) index of the most recent hit. A neighborhood probe against
  // these plus union-find transitivity reproduces the full pairwise linkage.
  DisjointSet ds(hits.size());
  std::unordered_map<std::uint64_t, std::size_t> last_at_pixel;
  last_at_pixel.reserve(hits.size() * 2);
  auto pixel_key = [](std::uint8_t cam, int x, int y) {
    return static_cast<std::uint64_t>(cam) << 40 | static_cast<std::uint64_t>(y) << 20 |
           static_cast<std::uint64_t>(x);
  };
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const RawPixelHit& h = hits[i];
    for (int dy = -params.gap_px; dy <= params.gap_px; ++dy) {
      for (int dx = -params.gap_px; dx <= params.gap_px; ++dx) {
        int nx = h.x + dx;
        int ny = h.y + dy;
        if (nx < 0 || ny < 0) continue;
        auto it = last_at_pixel.find(pixel_key(h.cam, nx, ny));
        if (it == last_at_pixel.end()) continue;
        if (h.t_ns - hits[it->second].t_ns <= params.window_ns) ds.unite(i, it->second);
      }
    }
    last_at_pixel[pixel_key(h.cam, h.x, h.y)] = i;
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < hits.size(); ++i) clusters[ds.find(i)].push_back(i);

  std::vector<DetectionEvent> events;
  events.reserve(clusters.size());
  for (auto& [root, members] : clusters) {
    double sum_a = 0.0, sum_ax = 0.0, sum_ay = 0.0;
    std::size_t brightest = members.front();
    for (std::size_t idx : members) {
      const RawPixelHit& h = hits[idx];
      sum_a += h.amplitude;
      sum_ax += h.amplitude * (h.x + 0.5);
      sum_ay += h.amplitude * (h.y + 0.5);
      const RawPixelHit& best = hits[brightest];
      if (h.amplitude > best.amplitude ||
          (h.amplitude == best.amplitude && hit_order(h, best))) {
        brightest = idx;
      }
    }
    if (sum_a <= 0.0) continue;
    const RawPixelHit& peak = hits[brightest];
    DetectionEvent e;
    e.cam = peak.cam;
    e.x_px = sum_ax / sum_a;
    e.y_px = sum_ay / sum_a;
    // Undo the modeled intensity-dependent skew of the brightest pixel.
    e.t_ns = peak.t_ns + params.time_skew_ns * (peak.amplitude / params.amplitude_gain);
    e.cluster_size = static_cast<std::uint16_t>(std::min<std::size_t>(members.size(), 0xffff));
    events.push_back(e);
  }
  std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
    if (a.y_px != b.y_px) return a.y_px < b.y_px;
    return a.x_px < b.x_px;
  });
  return events;
}

}  // namespace qclfm
