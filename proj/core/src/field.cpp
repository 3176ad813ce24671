#include "qclfm/field.hpp"

#include <algorithm>
#include <sstream>

#include "fft.hpp"

namespace qclfm {

ComplexField::ComplexField(int width, int height, double pitch_um, double lambda_um)
    : width_(width), height_(height), pitch_um_(pitch_um), lambda_um_(lambda_um) {
  if (width < 2 || height < 2) {
    throw ConfigError("field grid must be at least 2x2");
  }
  if (!(pitch_um > 0.0) || !(lambda_um > 0.0)) {
    throw ConfigError("field pitch and wavelength must be positive");
  }
  values_.assign(static_cast<std::size_t>(width) * height, {0.0, 0.0});
}

ComplexField ComplexField::constant(int width, int height, double pitch_um, double lambda_um,
                                    std::complex<double> value) {
  ComplexField f(width, height, pitch_um, lambda_um);
  std::fill(f.values_.begin(), f.values_.end(), value);
  return f;
}

double ComplexField::total_power() const {
  double sum = 0.0;
  for (const auto& v : values_) sum += std::norm(v);
  return sum * pitch_um_ * pitch_um_;
}

bool ComplexField::all_finite() const {
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

bool ComplexField::same_grid(const ComplexField& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         pitch_um_ == other.pitch_um_ && lambda_um_ == other.lambda_um_;
}

SpatialFrequencyGrid SpatialFrequencyGrid::make(const ComplexField& field) {
  SpatialFrequencyGrid g;
  g.k = field.wavenumber();
  g.kx.resize(field.width());
  g.ky.resize(field.height());
  const double dkx = 2.0 * M_PI / (field.width() * field.pitch_um());
  const double dky = 2.0 * M_PI / (field.height() * field.pitch_um());
  for (int i = 0; i < field.width(); ++i) {
    int s = i < (field.width() + 1) / 2 ? i : i - field.width();
    g.kx[i] = dkx * s;
  }
  for (int j = 0; j < field.height(); ++j) {
    int s = j < (field.height() + 1) / 2 ? j : j - field.height();
    g.ky[j] = dky * s;
  }
  return g;
}

double aliasing_limit_um(const ComplexField& field) {
  int n = std::min(field.width(), field.height());
  return n * field.pitch_um() * field.pitch_um() / field.lambda_um();
}

ComplexField propagate(const ComplexField& field, double z_um, EvanescentMode mode) {
  if (!field.all_finite()) {
    throw NumericalError("propagate: field contains non-finite values");
  }
  if (z_um == 0.0) return field;

  if (std::abs(z_um) > aliasing_limit_um(field)) {
    std::ostringstream msg;
    msg << "propagation to |z| = " << std::abs(z_um) << " um exceeds the aliasing limit "
        << aliasing_limit_um(field) << " um for a " << field.width() << "x" << field.height()
        << " grid at pitch " << field.pitch_um() << " um; consider zero-padding";
    warn_once(msg.str());
  }

  ComplexField out = field;
  detail::fft2d(out.values().data(), out.width(), out.height(), true);

  const auto grid = SpatialFrequencyGrid::make(field);
  for (int iy = 0; iy < out.height(); ++iy) {
    for (int ix = 0; ix < out.width(); ++ix) {
      std::complex<double> h;
      if (!grid.evanescent(ix, iy)) {
        h = std::polar(1.0, grid.kz(ix, iy) * z_um);
      } else if (mode == EvanescentMode::kAttenuate) {
        h = std::exp(-grid.kappa(ix, iy) * std::abs(z_um));
      } else {
        h = 0.0;
      }
      out.at(ix, iy) *= h;
    }
  }

  detail::fft2d(out.values().data(), out.width(), out.height(), false);
  return out;
}

ComplexField inverse_propagate(const ComplexField& field, double z_um, EvanescentMode mode) {
  return propagate(field, -z_um, mode);
}

}  // namespace qclfm
