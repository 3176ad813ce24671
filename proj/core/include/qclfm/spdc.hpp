#pragma once

#include <cstdint>
#include <vector>

#include "qclfm/common.hpp"

namespace qclfm {

/// Pump laser and crystal parameters governing pair generation.
struct PumpParams {
  double coherence_length_um = 200.0;  ///< pump coherence length l_c
  double waist_um = 500.0;             ///< pump beam waist radius at the crystal
  double wavelength_um = 0.405;
  double pair_rate_per_s = 15.0e6;
  double crystal_aperture_um = 2000.0;  ///< transverse extent of the generation region
};

/// Ground-truth pair sample: shared birth position at the crystal plane,
/// anti-correlated transverse momenta, common birth time.
struct PhotonPairEvent {
  Vec2 r_um;       ///< birth position, shared by both photons
  Vec2 k_signal;   ///< signal transverse momentum (1/um)
  Vec2 k_idler;    ///< idler transverse momentum (1/um)
  double t_ns = 0.0;
  double lambda_um = 0.810;  ///< degenerate down-converted wavelength
};

/// Width of the pair momentum-sum distribution:
/// sigma_{k1+k2} = sqrt(1/l_c^2 + 1/(4 w_p^2)).
double momentum_sigma(const PumpParams& pump);

/// Statistical source model. Signal momenta are drawn from an isotropic
/// Gaussian marginal of width sigma_single; idler momenta are the negated
/// signal momenta plus per-component Gaussian noise of width momentum_sigma().
struct SourceModel {
  PumpParams pump;
  double sigma_single_k = 0.171;   ///< width of the single-photon momentum marginal (1/um)
  double position_blur_um = 0.0;   ///< optional pair birth-position blur, 0 = photons share a point
};

/// Draws n pairs with Poisson (uniform-conditional) birth times over
/// duration_s. Deterministic for a given seed. Paraxial cut: |k| < 2 pi/lambda.
std::vector<PhotonPairEvent> sample_pairs(const SourceModel& source, std::size_t n,
                                          std::uint64_t seed, double duration_s);

}  // namespace qclfm
