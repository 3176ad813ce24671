#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qclfm/common.hpp"

namespace qclfm {

/// A 2D complex scalar amplitude U(x,y)e^{i phi(x,y)} sampled on a square-pixel
/// grid with physical pitch, plus the wavelength it propagates at.
///
/// Conventions, fixed project-wide:
///  - storage is row-major (y-major): index = y * width + x;
///  - pixel (ix, iy) is centered at ((ix + 0.5) - width/2) * pitch in x,
///    likewise in y, so the grid is symmetric about the optical axis;
///  - the forward DFT maps x -> k with the e^{-i k x} kernel and no
///    normalization; the inverse carries the 1/(width*height) factor;
///  - spatial frequencies are k_x[j] = 2*pi*j' / (width*pitch) with j' the
///    signed FFT index in [-width/2, width/2).
/// All lengths in micrometers, wavenumbers in inverse micrometers.
class ComplexField {
 public:
  ComplexField(int width, int height, double pitch_um, double lambda_um);

  static ComplexField constant(int width, int height, double pitch_um, double lambda_um,
                               std::complex<double> value);

  int width() const { return width_; }
  int height() const { return height_; }
  double pitch_um() const { return pitch_um_; }
  double lambda_um() const { return lambda_um_; }
  /// Total wavenumber 2*pi/lambda.
  double wavenumber() const { return 2.0 * M_PI / lambda_um_; }

  std::complex<double>& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::complex<double>& at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<std::complex<double>> values() { return values_; }
  std::span<const std::complex<double>> values() const { return values_; }

  /// Physical center coordinate of pixel column ix (micrometers).
  double x_um(int ix) const { return (ix + 0.5 - 0.5 * width_) * pitch_um_; }
  double y_um(int iy) const { return (iy + 0.5 - 0.5 * height_) * pitch_um_; }

  /// Total power sum |U|^2 * pitch^2.
  double total_power() const;
  bool all_finite() const;
  bool same_grid(const ComplexField& other) const;

 private:
  int width_;
  int height_;
  double pitch_um_;
  double lambda_um_;
  std::vector<std::complex<double>> values_;
};

/// Discrete transverse/longitudinal wavenumber grid of a field.
struct SpatialFrequencyGrid {
  std::vector<double> kx;  ///< per-column k_x, FFT layout
  std::vector<double> ky;  ///< per-row k_y, FFT layout
  double k = 0.0;          ///< total wavenumber 2*pi/lambda

  static SpatialFrequencyGrid make(const ComplexField& field);

  bool evanescent(int ix, int iy) const {
    return kx[ix] * kx[ix] + ky[iy] * ky[iy] > k * k;
  }
  /// Longitudinal wavenumber sqrt(k^2 - kx^2 - ky^2); only valid when propagating.
  double kz(int ix, int iy) const {
    return std::sqrt(k * k - kx[ix] * kx[ix] - ky[iy] * ky[iy]);
  }
  /// Decay constant sqrt(kx^2 + ky^2 - k^2) of an evanescent mode.
  double kappa(int ix, int iy) const {
    return std::sqrt(kx[ix] * kx[ix] + ky[iy] * ky[iy] - k * k);
  }
};

enum class EvanescentMode {
  kAttenuate,  ///< multiply by e^{-kappa |z|} (default)
  kZero,       ///< hard band limit
};

/// Angular-spectrum propagation over a distance z (negative z reverses).
/// Propagating modes gain e^{i k_z z}; evanescent modes decay per `mode`.
/// Emits a one-shot diagnostic when |z| exceeds aliasing_limit_um().
ComplexField propagate(const ComplexField& field, double z_um,
                       EvanescentMode mode = EvanescentMode::kAttenuate);

/// Equivalent to propagate(field, -z): undoes a forward propagation over z.
ComplexField inverse_propagate(const ComplexField& field, double z_um,
                               EvanescentMode mode = EvanescentMode::kAttenuate);

/// Distance beyond which the sampled transfer function wraps its quadratic
/// phase (approximately N * pitch^2 / lambda); propagation past it proceeds
/// but the caller should consider zero-padding.
double aliasing_limit_um(const ComplexField& field);

}  // namespace qclfm
