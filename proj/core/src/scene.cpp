#include "qclfm/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "fft.hpp"

namespace qclfm {

namespace {

constexpr double kAmplitudeTol = 1.0 + 1e-9;

void validate_target(const SceneTarget& t) {
  for (const auto& v : t.transmission.values()) {
    if (std::abs(v) > kAmplitudeTol) {
      throw ConfigError("scene target transmission amplitude exceeds 1");
    }
  }
}

/// Bilinear sample at continuous pixel-center coordinates, clamped to edges.
double sample_clamped(const std::vector<double>& img, int w, int h, double px, double py) {
  double fx = px - 0.5;
  double fy = py - 0.5;
  int x0 = static_cast<int>(std::floor(fx));
  int y0 = static_cast<int>(std::floor(fy));
  double ax = fx - x0;
  double ay = fy - y0;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  int x1 = clampi(x0 + 1, w - 1);
  int y1 = clampi(y0 + 1, h - 1);
  x0 = clampi(x0, w - 1);
  y0 = clampi(y0, h - 1);
  auto at = [&](int x, int y) { return img[static_cast<std::size_t>(y) * w + x]; };
  return (1 - ax) * (1 - ay) * at(x0, y0) + ax * (1 - ay) * at(x1, y0) +
         (1 - ax) * ay * at(x0, y1) + ax * ay * at(x1, y1);
}

}  // namespace

double usaf_frequency_lp_mm(int group, int element) {
  return std::pow(2.0, group + (element - 1) / 6.0);
}

UsafTarget usaf_chart(const std::vector<std::pair<int, int>>& items, double pitch_um,
                      int size_px, double lambda_um) {
  if (items.empty()) throw ConfigError("usaf chart needs at least one element");
  for (auto [g, e] : items) {
    if (g < 0 || g > 9 || e < 1 || e > 6) throw ConfigError("usaf group/element out of range");
  }

  UsafTarget out{SceneTarget{ComplexField(size_px, size_px, pitch_um, lambda_um)}, {}};

  double total_h = 0.0;
  std::vector<double> widths;
  for (auto [g, e] : items) {
    double spacing = 1000.0 / usaf_frequency_lp_mm(g, e);
    double w = spacing / 2.0;
    if (w < 2.0 * pitch_um) {
      throw ConfigError("usaf bar width " + std::to_string(w) +
                        " um is unresolvable at pitch " + std::to_string(pitch_um) + " um");
    }
    widths.push_back(w);
    total_h += 5.0 * w + 2.0 * w;  // row height plus separation
  }
  double canvas = size_px * pitch_um;
  if (total_h > canvas) throw ConfigError("usaf chart does not fit the canvas height");

  double y_cursor = total_h / 2.0;  // top of the first row
  std::vector<std::array<double, 4>> bars;  // x0, x1, y0, y1 (um, transmissive)
  for (std::size_t i = 0; i < items.size(); ++i) {
    double w = widths[i];
    double bar_len = 5.0 * w;
    double row_h = 5.0 * w;
    double yc = y_cursor - row_h / 2.0;
    double h_xc = -3.5 * w;  // horizontal-bar block center
    double v_xc = +3.5 * w;  // vertical-bar block center
    if (6.0 * w * 2.0 > canvas) throw ConfigError("usaf chart does not fit the canvas width");

    UsafElement el;
    el.group = items[i].first;
    el.element = items[i].second;
    el.spacing_um = 2.0 * w;
    el.bar_width_um = w;
    el.bar_length_um = bar_len;
    el.h_center_um = {h_xc, yc};
    el.v_center_um = {v_xc, yc};
    out.elements.push_back(el);

    for (int j = 0; j < 3; ++j) {
      double offset = (j - 1) * 2.0 * w;
      // horizontal bars: long axis along x, stacked in y
      bars.push_back({h_xc - bar_len / 2.0, h_xc + bar_len / 2.0,
                      yc + offset - w / 2.0, yc + offset + w / 2.0});
      // vertical bars: long axis along y, stacked in x
      bars.push_back({v_xc + offset - w / 2.0, v_xc + offset + w / 2.0,
                      yc - bar_len / 2.0, yc + bar_len / 2.0});
    }
    y_cursor -= row_h + 2.0 * w;
  }

  ComplexField& t = out.target.transmission;
  for (int iy = 0; iy < size_px; ++iy) {
    for (int ix = 0; ix < size_px; ++ix) {
      double x = t.x_um(ix);
      double y = t.y_um(iy);
      for (const auto& b : bars) {
        if (x >= b[0] && x < b[1] && y >= b[2] && y < b[3]) {
          t.at(ix, iy) = 1.0;
          break;
        }
      }
    }
  }
  return out;
}

UsafTarget usaf_target(int group, const std::vector<int>& elements, double pitch_um,
                       int size_px, double lambda_um) {
  std::vector<std::pair<int, int>> items;
  for (int e : elements) items.emplace_back(group, e);
  return usaf_chart(items, pitch_um, size_px, lambda_um);
}

VolumetricScene fiber_scene(std::span<const FiberSpec> fibers, const SceneGrid& grid,
                            double lambda_um) {
  if (fibers.empty()) throw ConfigError("fiber scene needs at least one strand");
  std::vector<FiberSpec> sorted(fibers.begin(), fibers.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const FiberSpec& a, const FiberSpec& b) { return a.z_um < b.z_um; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].z_um == sorted[i - 1].z_um) {
      throw ConfigError("fiber depths must be distinct (one slice per depth)");
    }
  }

  VolumetricScene scene;
  for (const auto& f : sorted) {
    ComplexField t = ComplexField::constant(grid.size_px, grid.size_px, grid.pitch_um,
                                            lambda_um, 1.0);
    Vec2 normal{-std::sin(f.angle_rad), std::cos(f.angle_rad)};
    for (int iy = 0; iy < grid.size_px; ++iy) {
      for (int ix = 0; ix < grid.size_px; ++ix) {
        Vec2 p{t.x_um(ix) - f.center_um.x, t.y_um(iy) - f.center_um.y};
        if (std::abs(p.x * normal.x + p.y * normal.y) <= f.width_um / 2.0) {
          t.at(ix, iy) = 0.0;
        }
      }
    }
    scene.slices.push_back(SceneTarget{std::move(t), f.z_um, false, 0.0});
  }
  return scene;
}

VolumetricScene fiber_phantom(int n_fibers, double diameter_min_um, double diameter_max_um,
                              double z_min_um, double z_max_um, std::uint64_t seed,
                              const SceneGrid& grid, double lambda_um) {
  if (n_fibers < 1) throw ConfigError("fiber_phantom: need at least one fiber");
  Rng rng(derive_seed(seed, 0xf1be2));
  double half = grid.size_px * grid.pitch_um / 2.0;
  std::vector<FiberSpec> fibers;
  for (int i = 0; i < n_fibers; ++i) {
    FiberSpec f;
    f.center_um = {rng.uniform(-0.6 * half, 0.6 * half), rng.uniform(-0.6 * half, 0.6 * half)};
    f.angle_rad = rng.uniform(0.0, M_PI);
    f.width_um = rng.uniform(diameter_min_um, diameter_max_um);
    f.z_um = rng.uniform(z_min_um, z_max_um);
    fibers.push_back(f);
  }
  return fiber_scene(fibers, grid, lambda_um);
}

ScenePropagator::ScenePropagator(VolumetricScene scene, Illumination illumination,
                                 const SceneSamplerOptions& options)
    : scene_(std::move(scene)), illumination_(illumination), options_(options) {
  if (scene_.slices.empty()) throw ConfigError("scene has no slices");
  const ComplexField& ref = scene_.slices.front().transmission;
  width_ = ref.width();
  height_ = ref.height();
  pitch_um_ = ref.pitch_um();
  lambda_um_ = ref.lambda_um();
  k_ = ref.wavenumber();

  int n_fourier = 0;
  for (const auto& s : scene_.slices) {
    validate_target(s);
    if (!s.transmission.same_grid(ref)) throw ConfigError("scene slices must share one grid");
    if (s.fourier_plane) ++n_fourier;
  }
  if (n_fourier > 1 || (n_fourier == 1 && scene_.slices.size() > 1)) {
    throw ConfigError("a Fourier-plane target must be the only slice");
  }
  for (std::size_t i = 1; i < scene_.slices.size(); ++i) {
    if (scene_.slices[i].z_offset_um <= scene_.slices[i - 1].z_offset_um) {
      throw ConfigError("scene slice depths must be strictly increasing");
    }
  }

  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  envelope_.assign(n, 1.0);
  if (illumination_.kind == Illumination::Kind::kGaussian) {
    if (!(illumination_.waist_um > 0.0)) throw ConfigError("gaussian illumination needs a waist");
    for (int iy = 0; iy < height_; ++iy) {
      for (int ix = 0; ix < width_; ++ix) {
        double x = ref.x_um(ix);
        double y = ref.y_um(iy);
        double amp = std::exp(-(x * x + y * y) / (illumination_.waist_um * illumination_.waist_um));
        envelope_[static_cast<std::size_t>(iy) * width_ + ix] = amp * amp;
      }
    }
  }

  if (n_fourier == 1) {
    fourier_slice_ = &scene_.slices.front();
    fourier_intensity_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      fourier_intensity_[i] = std::norm(fourier_slice_->transmission.values()[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += fourier_intensity_[i];
    throughput_ = acc / static_cast<double>(n);
    return;
  }

  if (options_.exact_tilt && scene_.slices.size() != 1) {
    throw ConfigError("exact tilt propagation supports a single slice only");
  }

  for (const auto& s : scene_.slices) {
    SliceCache cache;
    cache.z_um = s.z_offset_um;
    ComplexField diffracted = propagate(s.transmission, s.z_offset_um);
    cache.intensity.resize(n);
    for (std::size_t i = 0; i < n; ++i) cache.intensity[i] = std::norm(diffracted.values()[i]);
    slices_.push_back(std::move(cache));
  }

  double env_total = 0.0;
  for (double e : envelope_) env_total += e;

  if (slices_.size() == 1 && !options_.exact_tilt) {
    single_cdf_.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += slices_[0].intensity[i] * envelope_[i];
      single_cdf_[i] = acc;
    }
    single_total_ = acc;
    throughput_ = acc / env_total;
  } else {
    // normal-incidence throughput; per-tilt acceptance is computed per bin
    auto d0 = tilted_density({0.0, 0.0});
    double acc = 0.0;
    for (double v : d0) acc += v;
    throughput_ = acc / env_total;
  }
}

std::vector<double> ScenePropagator::tilted_density(const Vec2& k_bin) const {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  std::vector<double> density(n, 0.0);
  double kperp2 = k_bin.norm2();
  if (kperp2 >= k_ * k_) return density;  // beyond the propagating cone
  double kz = std::sqrt(k_ * k_ - kperp2);

  if (options_.exact_tilt) {
    // exact shifted-k_z propagation of the (single) slice
    const SceneTarget& s = scene_.slices.front();
    ComplexField f = s.transmission;
    detail::fft2d(f.values().data(), width_, height_, true);
    auto grid = SpatialFrequencyGrid::make(f);
    for (int iy = 0; iy < height_; ++iy) {
      for (int ix = 0; ix < width_; ++ix) {
        double kxs = grid.kx[ix] + k_bin.x;
        double kys = grid.ky[iy] + k_bin.y;
        double arg = k_ * k_ - kxs * kxs - kys * kys;
        std::complex<double> h;
        if (arg >= 0.0) {
          h = std::polar(1.0, std::sqrt(arg) * s.z_offset_um);
        } else {
          h = std::exp(-std::sqrt(-arg) * std::abs(s.z_offset_um));
        }
        f.at(ix, iy) *= h;
      }
    }
    detail::fft2d(f.values().data(), width_, height_, false);
    for (std::size_t i = 0; i < n; ++i) density[i] = std::norm(f.values()[i]) * envelope_[i];
    return density;
  }

  for (std::size_t i = 0; i < n; ++i) density[i] = envelope_[i];
  for (const auto& slice : slices_) {
    double dx_px = (k_bin.x / kz) * slice.z_um / pitch_um_;
    double dy_px = (k_bin.y / kz) * slice.z_um / pitch_um_;
    for (int iy = 0; iy < height_; ++iy) {
      for (int ix = 0; ix < width_; ++ix) {
        double v = sample_clamped(slice.intensity, width_, height_, ix + 0.5 - dx_px,
                                  iy + 0.5 - dy_px);
        density[static_cast<std::size_t>(iy) * width_ + ix] *= v;
      }
    }
  }
  return density;
}

std::optional<Vec2> ScenePropagator::sample_single(const Vec2& k_signal, SmallRng& rng) const {
  if (rng.uniform() >= throughput_) return std::nullopt;
  double u = rng.uniform() * single_total_;
  auto it = std::upper_bound(single_cdf_.begin(), single_cdf_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - single_cdf_.begin());
  if (idx >= single_cdf_.size()) idx = single_cdf_.size() - 1;
  int ix = static_cast<int>(idx % width_);
  int iy = static_cast<int>(idx / width_);
  double x = (ix + rng.uniform() - 0.5 * width_) * pitch_um_;
  double y = (iy + rng.uniform() - 0.5 * height_) * pitch_um_;

  double kperp2 = k_signal.norm2();
  if (kperp2 >= k_ * k_) return std::nullopt;
  double kz = std::sqrt(k_ * k_ - kperp2);
  double z = slices_[0].z_um;
  return Vec2{x + (k_signal.x / kz) * z, y + (k_signal.y / kz) * z};
}

std::vector<std::optional<Vec2>> ScenePropagator::sample_batch(
    std::span<const PhotonPairEvent> pairs, std::uint64_t seed) const {
  std::vector<std::optional<Vec2>> out(pairs.size());

  if (fourier_slice_) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      SmallRng rng(derive_seed(seed, i));
      double px = pairs[i].k_signal.x * fourier_slice_->fourier_scale_um_per_k / pitch_um_ +
                  0.5 * width_;
      double py = pairs[i].k_signal.y * fourier_slice_->fourier_scale_um_per_k / pitch_um_ +
                  0.5 * height_;
      double trans = 0.0;
      if (px >= 0.0 && px < width_ && py >= 0.0 && py < height_) {
        trans = sample_clamped(fourier_intensity_, width_, height_, px, py);
      }
      if (rng.uniform() < trans) out[i] = pairs[i].r_um;
    }
    return out;
  }

  if (!single_cdf_.empty()) {
    parallel_for((pairs.size() + 65535) / 65536, [&](std::size_t chunk) {
      std::size_t begin = chunk * 65536;
      std::size_t end = std::min(begin + 65536, pairs.size());
      for (std::size_t i = begin; i < end; ++i) {
        SmallRng rng(derive_seed(seed, i));
        out[i] = sample_single(pairs[i].k_signal, rng);
      }
    });
    return out;
  }

  // group photons by tilt bin, build each bin's density once
  double env_total = 0.0;
  for (double e : envelope_) env_total += e;
  std::map<std::pair<int, int>, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    int bx = static_cast<int>(std::lround(pairs[i].k_signal.x / options_.momentum_bin_k));
    int by = static_cast<int>(std::lround(pairs[i].k_signal.y / options_.momentum_bin_k));
    bins[{bx, by}].push_back(i);
  }
  std::vector<std::pair<std::pair<int, int>, std::vector<std::size_t>>> bin_list(bins.begin(),
                                                                                 bins.end());
  parallel_for(bin_list.size(), [&](std::size_t b) {
    const auto& [key, members] = bin_list[b];
    Vec2 k_bin{key.first * options_.momentum_bin_k, key.second * options_.momentum_bin_k};
    auto density = tilted_density(k_bin);
    std::vector<double> cdf(density.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
      acc += density[i];
      cdf[i] = acc;
    }
    if (acc <= 0.0) return;
    double acceptance = acc / env_total;
    for (std::size_t i : members) {
      SmallRng rng(derive_seed(seed, i));
      if (rng.uniform() >= acceptance) continue;
      double u = rng.uniform() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
      if (idx >= cdf.size()) idx = cdf.size() - 1;
      int ix = static_cast<int>(idx % width_);
      int iy = static_cast<int>(idx / width_);
      out[i] = Vec2{(ix + rng.uniform() - 0.5 * width_) * pitch_um_,
                    (iy + rng.uniform() - 0.5 * height_) * pitch_um_};
    }
  });
  return out;
}

}  // namespace qclfm
