#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qclfm/coincidence.hpp"
#include "qclfm/field.hpp"

namespace qclfm {

struct GridSpec {
  int width = 128;
  int height = 128;
  double pitch_um = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
};

/// Coincidence counts after the per-photon refocusing shift, plus the derived
/// diffraction-pattern amplitude sqrt(counts). With smoothing enabled the
/// amplitude is the square root of the Gaussian-smoothed counts.
struct ShiftedSumImage {
  GridSpec grid;
  double z_um = 0.0;
  double lambda_um = 0.0;
  std::vector<double> counts;     ///< raw per-pixel coincidence counts
  std::vector<double> amplitude;  ///< sqrt of (smoothed) counts
  std::size_t used = 0;
  std::size_t off_grid = 0;     ///< shifted positions that left the grid
  std::size_t rejected_k = 0;   ///< records with |k| at or beyond the propagating cone
};

struct RefocusOptions {
  double smoothing_sigma_px = 0.5;  ///< Gaussian smoothing before the sqrt; 0 disables
  bool bilinear = false;            ///< splat counts bilinearly instead of nearest-pixel
  /// Idler momenta are negated to recover the signal photon's direction
  /// (momentum anti-correlation). Disable only for sign-regression studies.
  bool negate_idler_momentum = true;
};

/// Ray-traces every coincidence to depth z: the signal position moves by
/// -theta_s * z with theta_s = k_s / k_z, undoing the tilt walk-off between
/// the target plane and the imaged plane, then lands in a counts histogram.
ShiftedSumImage ray_trace_refocus(std::span<const CoincidenceRecord> records, double z_um,
                                  const GridSpec& grid, double lambda_um,
                                  const RefocusOptions& options = {});

struct RetrievalResult {
  ComplexField sample;            ///< sample-plane field of the final iteration
  std::vector<double> residuals;  ///< diffraction-plane NRMS per iteration
  int iterations = 0;
};

struct GsOptions {
  int iterations = 10;
  /// Stop early once the residual drops below this (0 keeps all iterations).
  double residual_threshold = 0.0;
  /// Sample-plane phase enforced each iteration; empty means zero everywhere.
  std::optional<std::vector<double>> known_phase_rad;
  /// Observer called with the diffraction-plane field after each amplitude
  /// update (its modulus equals the measured amplitude by construction).
  std::function<void(int, const ComplexField&)> iteration_hook;
};

/// Alternating-projection amplitude retrieval against the angular-spectrum
/// propagator: attach a flat phase to the measured diffraction amplitude,
/// inverse-propagate to the sample plane, enforce the known phase, propagate
/// back, restore the measured amplitude, repeat. The residual is the NRMS
/// between the propagated and measured amplitudes over pixels with counts.
RetrievalResult gs_retrieve(const ShiftedSumImage& measured, double z_um,
                            const GsOptions& options = {});

}  // namespace qclfm
