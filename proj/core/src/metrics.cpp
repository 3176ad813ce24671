#include "qclfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qclfm {

double conventional_dof_um(const DofParams& p) {
  if (!(p.numerical_aperture > 0.0) || p.numerical_aperture > 1.0) {
    throw ConfigError("conventional_dof: NA must be in (0, 1]");
  }
  if (!(p.magnification > 0.0) || !(p.refractive_index >= 1.0)) {
    throw ConfigError("conventional_dof: invalid magnification or index");
  }
  return p.refractive_index * p.lambda_um / (p.numerical_aperture * p.numerical_aperture) +
         p.refractive_index * p.resolved_distance_um /
             (p.magnification * p.numerical_aperture);
}

namespace {

struct RectUm {
  double x0, x1, y0, y1;
};

struct GridView {
  std::span<const double> image;
  const GridSpec& grid;

  double px_of_x(double x_um) const { return x_um / grid.pitch_um + 0.5 * grid.width; }
  double py_of_y(double y_um) const { return y_um / grid.pitch_um + 0.5 * grid.height; }

  bool contains(const RectUm& r) const {
    return px_of_x(r.x0) >= 0 && px_of_x(r.x1) <= grid.width && py_of_y(r.y0) >= 0 &&
           py_of_y(r.y1) <= grid.height;
  }

  /// Mean over pixels whose centers fall inside the rect; nan when empty.
  double mean(const RectUm& r) const {
    int x0 = static_cast<int>(std::ceil(px_of_x(r.x0) - 0.5));
    int x1 = static_cast<int>(std::floor(px_of_x(r.x1) - 0.5));
    int y0 = static_cast<int>(std::ceil(py_of_y(r.y0) - 0.5));
    int y1 = static_cast<int>(std::floor(py_of_y(r.y1) - 0.5));
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, grid.width - 1);
    y1 = std::min(y1, grid.height - 1);
    double sum = 0.0;
    long count = 0;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        sum += image[static_cast<std::size_t>(y) * grid.width + x];
        ++count;
      }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
  }

  double annulus_median(const RectUm& inner, const RectUm& outer) const {
    std::vector<double> vals;
    int x0 = std::max(static_cast<int>(std::floor(px_of_x(outer.x0))), 0);
    int x1 = std::min(static_cast<int>(std::ceil(px_of_x(outer.x1))), grid.width - 1);
    int y0 = std::max(static_cast<int>(std::floor(py_of_y(outer.y0))), 0);
    int y1 = std::min(static_cast<int>(std::ceil(py_of_y(outer.y1))), grid.height - 1);
    double ix0 = px_of_x(inner.x0), ix1 = px_of_x(inner.x1);
    double iy0 = py_of_y(inner.y0), iy1 = py_of_y(inner.y1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double cx = x + 0.5, cy = y + 0.5;
        if (cx >= ix0 && cx < ix1 && cy >= iy0 && cy < iy1) continue;
        vals.push_back(image[static_cast<std::size_t>(y) * grid.width + x]);
      }
    }
    if (vals.empty()) return 0.0;
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    return vals[vals.size() / 2];
  }
};

/// Contrast of one three-bar block. `horizontal` bars run along x.
double block_contrast(const GridView& view, Vec2 center, double w, double len, bool horizontal,
                      double background) {
  // shrink sampled stripes away from edges
  double across_margin = 0.25 * w;
  double along_margin = 0.15 * len;
  double bar_sum = 0.0, gap_sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    double off = (j - 1) * 2.0 * w;
    RectUm r = horizontal
                   ? RectUm{center.x - len / 2 + along_margin, center.x + len / 2 - along_margin,
                            center.y + off - w / 2 + across_margin,
                            center.y + off + w / 2 - across_margin}
                   : RectUm{center.x + off - w / 2 + across_margin,
                            center.x + off + w / 2 - across_margin,
                            center.y - len / 2 + along_margin, center.y + len / 2 - along_margin};
    bar_sum += view.mean(r);
  }
  for (int j = 0; j < 2; ++j) {
    double off = (2 * j - 1) * w;  // gap centers at -w and +w
    RectUm r = horizontal
                   ? RectUm{center.x - len / 2 + along_margin, center.x + len / 2 - along_margin,
                            center.y + off - w / 2 + across_margin,
                            center.y + off + w / 2 - across_margin}
                   : RectUm{center.x + off - w / 2 + across_margin,
                            center.x + off + w / 2 - across_margin,
                            center.y - len / 2 + along_margin, center.y + len / 2 - along_margin};
    gap_sum += view.mean(r);
  }
  double bar = std::max(bar_sum / 3.0 - background, 0.0);
  double gap = std::max(gap_sum / 2.0 - background, 0.0);
  if (!(bar + gap > 0.0)) return 0.0;
  return std::clamp((bar - gap) / (bar + gap), 0.0, 1.0);
}

}  // namespace

ResolvabilityReport resolvability(std::span<const double> image, const GridSpec& grid,
                                  std::span<const UsafElement> elements, double threshold) {
  if (image.size() != grid.size()) throw ConfigError("resolvability: image/grid mismatch");
  GridView view{image, grid};

  ResolvabilityReport report;
  report.threshold = threshold;
  report.smallest_resolved_um = std::numeric_limits<double>::infinity();
  for (const auto& el : elements) {
    ElementScore score;
    score.group = el.group;
    score.element = el.element;
    score.spacing_um = el.spacing_um;

    double w = el.bar_width_um;
    double len = el.bar_length_um;
    RectUm bbox{std::min(el.h_center_um.x, el.v_center_um.x) - len / 2,
                std::max(el.h_center_um.x, el.v_center_um.x) + len / 2,
                el.h_center_um.y - len / 2, el.h_center_um.y + len / 2};
    RectUm inner{bbox.x0 - w, bbox.x1 + w, bbox.y0 - w, bbox.y1 + w};
    RectUm outer{bbox.x0 - 3 * w, bbox.x1 + 3 * w, bbox.y0 - 3 * w, bbox.y1 + 3 * w};
    if (!view.contains(outer)) {
      score.in_fov = false;
      report.elements.push_back(score);
      continue;
    }

    double background = view.annulus_median(inner, outer);
    double ch = block_contrast(view, el.h_center_um, w, len, true, background);
    double cv = block_contrast(view, el.v_center_um, w, len, false, background);
    score.contrast = std::min(ch, cv);
    score.resolved = score.contrast >= threshold;
    if (score.resolved) {
      report.smallest_resolved_um = std::min(report.smallest_resolved_um, el.spacing_um);
    }
    report.elements.push_back(score);
  }
  return report;
}

std::vector<DofCurvePoint> dof_curve(const FocalStack& stack,
                                     std::span<const UsafElement> elements, double threshold) {
  if (stack.z_um.size() < 1) throw ConfigError("dof_curve: empty stack");
  std::vector<DofCurvePoint> curve;
  for (std::size_t i = 0; i < stack.z_um.size(); ++i) {
    DofCurvePoint pt;
    pt.z_um = stack.z_um[i];
    pt.report = resolvability(stack.slices[i], stack.grid, elements, threshold);
    pt.smallest_resolved_um = pt.report.smallest_resolved_um;
    curve.push_back(std::move(pt));
  }
  return curve;
}

std::vector<double> median_filter3(std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double a = values[i > 0 ? i - 1 : 0];
    double b = values[i];
    double c = values[i + 1 < values.size() ? i + 1 : values.size() - 1];
    out[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  return out;
}

}  // namespace qclfm
