#include "qclfm/refocus.hpp"

#include <algorithm>
#include <cmath>

namespace qclfm {

namespace {

/// Separable Gaussian blur with edge-renormalized kernels.
void gaussian_smooth(std::vector<double>& img, int w, int h, double sigma_px) {
  if (sigma_px <= 0.0) return;
  int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
  std::vector<double> kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma_px * sigma_px));
  }
  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, norm = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xi = x + i;
        if (xi < 0 || xi >= w) continue;
        acc += kernel[i + radius] * img[static_cast<std::size_t>(y) * w + xi];
        norm += kernel[i + radius];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc / norm;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, norm = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yi = y + i;
        if (yi < 0 || yi >= h) continue;
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(yi) * w + x];
        norm += kernel[i + radius];
      }
      img[static_cast<std::size_t>(y) * w + x] = acc / norm;
    }
  }
}

}  // namespace

ShiftedSumImage ray_trace_refocus(std::span<const CoincidenceRecord> records, double z_um,
                                  const GridSpec& grid, double lambda_um,
                                  const RefocusOptions& options) {
  if (records.empty()) throw ConfigError("ray_trace_refocus: no coincidence records");
  if (!std::isfinite(z_um)) throw ConfigError("ray_trace_refocus: z must be finite");

  ShiftedSumImage out;
  out.grid = grid;
  out.z_um = z_um;
  out.lambda_um = lambda_um;
  out.counts.assign(grid.size(), 0.0);

  const double k = 2.0 * M_PI / lambda_um;
  for (const auto& rec : records) {
    Vec2 k_sig = options.negate_idler_momentum ? -rec.idler_k : rec.idler_k;
    double kperp2 = k_sig.norm2();
    if (kperp2 >= k * k) {
      ++out.rejected_k;
      continue;
    }
    double kz = std::sqrt(k * k - kperp2);
    Vec2 theta{k_sig.x / kz, k_sig.y / kz};
    double x = rec.signal_pos_um.x - theta.x * z_um;
    double y = rec.signal_pos_um.y - theta.y * z_um;
    double px = x / grid.pitch_um + 0.5 * grid.width;
    double py = y / grid.pitch_um + 0.5 * grid.height;

    if (options.bilinear) {
      double fx = px - 0.5, fy = py - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      int y0 = static_cast<int>(std::floor(fy));
      double ax = fx - x0, ay = fy - y0;
      bool any = false;
      const double w4[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int i = 0; i < 4; ++i) {
        if (xs[i] < 0 || xs[i] >= grid.width || ys[i] < 0 || ys[i] >= grid.height) continue;
        out.counts[static_cast<std::size_t>(ys[i]) * grid.width + xs[i]] += w4[i];
        any = true;
      }
      any ? ++out.used : ++out.off_grid;
    } else {
      int ix = static_cast<int>(std::floor(px));
      int iy = static_cast<int>(std::floor(py));
      if (ix >= 0 && ix < grid.width && iy >= 0 && iy < grid.height) {
        out.counts[static_cast<std::size_t>(iy) * grid.width + ix] += 1.0;
        ++out.used;
      } else {
        ++out.off_grid;
      }
    }
  }

  if (out.off_grid > 0) {
    warn_once("ray_trace_refocus: " + std::to_string(out.off_grid) +
              " shifted photons fell outside the grid and were dropped");
  }

  std::vector<double> smoothed = out.counts;
  gaussian_smooth(smoothed, grid.width, grid.height, options.smoothing_sigma_px);
  out.amplitude.resize(smoothed.size());
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    out.amplitude[i] = std::sqrt(std::max(smoothed[i], 0.0));
  }
  return out;
}

RetrievalResult gs_retrieve(const ShiftedSumImage& measured, double z_um,
                            const GsOptions& options) {
  if (options.iterations < 1) throw ConfigError("gs_retrieve: iterations must be >= 1");
  const GridSpec& grid = measured.grid;
  if (measured.amplitude.size() != grid.size()) {
    throw ConfigError("gs_retrieve: amplitude size does not match grid");
  }
  double total = 0.0;
  for (double a : measured.amplitude) total += a;
  if (!(total > 0.0)) throw NumericalError("gs_retrieve: measured amplitude is all zero");
  if (options.known_phase_rad && options.known_phase_rad->size() != grid.size()) {
    throw ConfigError("gs_retrieve: known phase grid does not match");
  }

  double norm_meas = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (measured.counts[i] > 0.0) norm_meas += measured.amplitude[i] * measured.amplitude[i];
  }
  if (!(norm_meas > 0.0)) norm_meas = 1.0;

  // step 1: measured amplitude with a flat initial phase
  ComplexField diffraction(grid.width, grid.height, grid.pitch_um, measured.lambda_um);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    diffraction.values()[i] = measured.amplitude[i];
  }

  RetrievalResult result{ComplexField(grid.width, grid.height, grid.pitch_um,
                                      measured.lambda_um),
                         {}, 0};
  for (int iter = 0; iter < options.iterations; ++iter) {
    // step 2: back to the sample plane
    ComplexField sample = inverse_propagate(diffraction, z_um);
    result.sample = sample;

    // step 3: enforce the known sample phase, propagate forward again
    ComplexField constrained = sample;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double amp = std::abs(constrained.values()[i]);
      double phase = options.known_phase_rad ? (*options.known_phase_rad)[i] : 0.0;
      constrained.values()[i] = std::polar(amp, phase);
    }
    ComplexField forward = propagate(constrained, z_um);

    // residual before the amplitude update, on pixels that saw photons
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (measured.counts[i] <= 0.0) continue;
      double d = std::abs(forward.values()[i]) - measured.amplitude[i];
      err += d * d;
    }
    result.residuals.push_back(std::sqrt(err / norm_meas));

    // step 4: keep the propagated phase, restore the measured amplitude
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double phase = std::arg(forward.values()[i]);
      diffraction.values()[i] = std::polar(measured.amplitude[i], phase);
    }
    result.iterations = iter + 1;
    if (options.iteration_hook) options.iteration_hook(iter + 1, diffraction);
    if (options.residual_threshold > 0.0 &&
        result.residuals.back() < options.residual_threshold) {
      break;
    }
  }
  return result;
}

}  // namespace qclfm
