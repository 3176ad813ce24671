#include "qclfm/volumetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qclfm {

FocalStack sweep(std::span<const CoincidenceRecord> records, double z_min_um, double z_max_um,
                 double z_step_um, const GridSpec& grid, double lambda_um,
                 const SweepOptions& options) {
  if (!(z_step_um > 0.0)) throw ConfigError("sweep: z step must be positive");
  if (z_min_um > z_max_um) throw ConfigError("sweep: z_min must not exceed z_max");

  FocalStack stack;
  stack.grid = grid;
  stack.lambda_um = lambda_um;
  for (double z = z_min_um; z <= z_max_um + 1e-9 * z_step_um; z += z_step_um) {
    stack.z_um.push_back(z);
  }
  stack.slices.resize(stack.z_um.size());

  GsOptions gs;
  gs.iterations = options.gs_iterations;
  parallel_for(stack.z_um.size(), [&](std::size_t i) {
    auto shifted = ray_trace_refocus(records, stack.z_um[i], grid, lambda_um, options.refocus);
    auto retrieved = gs_retrieve(shifted, stack.z_um[i], gs);
    std::vector<double> amplitude(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      amplitude[p] = std::abs(retrieved.sample.values()[p]);
    }
    stack.slices[i] = std::move(amplitude);
  });
  return stack;
}

std::vector<double> all_in_focus(const FocalStack& stack) {
  if (stack.slices.empty()) throw ConfigError("all_in_focus: empty stack");
  std::vector<double> sum(stack.grid.size(), 0.0);
  for (const auto& slice : stack.slices) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += slice[i];
  }
  return sum;
}

std::vector<double> sharpness_map(std::span<const double> image, const GridSpec& grid,
                                  const DepthMapOptions& options) {
  const int w = grid.width;
  const int h = grid.height;
  std::vector<double> score(grid.size(), 0.0);

  if (options.modified_laplacian) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto at = [&](int xi, int yi) {
          xi = std::clamp(xi, 0, w - 1);
          yi = std::clamp(yi, 0, h - 1);
          return image[static_cast<std::size_t>(yi) * w + xi];
        };
        double ml = std::abs(2 * at(x, y) - at(x - 1, y) - at(x + 1, y)) +
                    std::abs(2 * at(x, y) - at(x, y - 1) - at(x, y + 1));
        score[static_cast<std::size_t>(y) * w + x] = ml;
      }
    }
    // aggregate over the window below
  }

  // integral images for windowed aggregation (of the image or of ML)
  std::vector<double> work;
  std::span<const double> base = image;
  if (options.modified_laplacian) {
    work.assign(score.begin(), score.end());
    base = work;
  }
  std::vector<double> i1((w + 1) * (h + 1), 0.0), i2((w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = base[static_cast<std::size_t>(y) * w + x];
      std::size_t idx = static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1);
      i1[idx] = v + i1[idx - 1] + i1[idx - (w + 1)] - i1[idx - (w + 1) - 1];
      i2[idx] = v * v + i2[idx - 1] + i2[idx - (w + 1)] - i2[idx - (w + 1) - 1];
    }
  }
  const int r = options.window_px / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int x0 = std::max(x - r, 0), x1 = std::min(x + r + 1, w);
      int y0 = std::max(y - r, 0), y1 = std::min(y + r + 1, h);
      double n = static_cast<double>((x1 - x0) * (y1 - y0));
      auto box = [&](const std::vector<double>& ii) {
        return ii[static_cast<std::size_t>(y1) * (w + 1) + x1] -
               ii[static_cast<std::size_t>(y1) * (w + 1) + x0] -
               ii[static_cast<std::size_t>(y0) * (w + 1) + x1] +
               ii[static_cast<std::size_t>(y0) * (w + 1) + x0];
      };
      double mean = box(i1) / n;
      double var = std::max(box(i2) / n - mean * mean, 0.0);
      score[static_cast<std::size_t>(y) * w + x] =
          options.modified_laplacian ? box(i1) / n : var;
    }
  }
  return score;
}

DepthMap depth_map(const FocalStack& stack, const DepthMapOptions& options) {
  if (stack.slices.size() < 2) throw ConfigError("depth_map: stack needs at least 2 slices");
  const std::size_t n = stack.grid.size();

  std::vector<std::vector<double>> scores(stack.slices.size());
  parallel_for(stack.slices.size(), [&](std::size_t s) {
    scores[s] = sharpness_map(stack.slices[s], stack.grid, options);
  });

  DepthMap map;
  map.grid = stack.grid;
  map.z_um.assign(n, std::numeric_limits<float>::quiet_NaN());
  map.confidence.assign(n, 0.0);
  map.masked.assign(n, true);

  std::vector<double> peak(n, 0.0);
  std::vector<std::size_t> arg(n, 0);
  std::vector<double> column(stack.slices.size());
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = 0;
    for (std::size_t s = 0; s < scores.size(); ++s) {
      column[s] = scores[s][p];
      bool better = column[s] > column[best];
      // ties break toward the slice nearest the nominal focus
      bool tie_closer = column[s] == column[best] &&
                        std::abs(stack.z_um[s]) < std::abs(stack.z_um[best]);
      if (s > 0 && (better || tie_closer)) best = s;
    }
    peak[p] = column[best];
    arg[p] = best;
    std::vector<double> sorted(column);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    map.confidence[p] = peak[p] - sorted[sorted.size() / 2];
  }

  // robust background threshold on the peak-score distribution
  std::vector<double> sorted(peak);
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  std::vector<double> dev(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) dev[i] = std::abs(sorted[i] - median);
  std::sort(dev.begin(), dev.end());
  double mad = dev[dev.size() / 2];
  double threshold = median + options.mad_k * mad;

  for (std::size_t p = 0; p < n; ++p) {
    if (peak[p] <= threshold) continue;
    map.masked[p] = false;
    map.z_um[p] = static_cast<float>(stack.z_um[arg[p]]);
  }
  return map;
}

}  // namespace qclfm
