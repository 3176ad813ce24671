#include "qclfm/spdc.hpp"

#include <algorithm>
#include <cmath>

namespace qclfm {

namespace {

void validate(const PumpParams& pump) {
  if (!(pump.coherence_length_um > 0.0)) throw ConfigError("pump coherence length must be > 0");
  if (!(pump.waist_um > 0.0)) throw ConfigError("pump waist must be > 0");
  if (!(pump.pair_rate_per_s > 0.0)) throw ConfigError("pair rate must be > 0");
}

}  // namespace

double momentum_sigma(const PumpParams& pump) {
  validate(pump);
  double lc = pump.coherence_length_um;
  double wp = pump.waist_um;
  return std::sqrt(1.0 / (lc * lc) + 1.0 / (4.0 * wp * wp));
}

std::vector<PhotonPairEvent> sample_pairs(const SourceModel& source, std::size_t n,
                                          std::uint64_t seed, double duration_s) {
  if (n == 0) throw ConfigError("sample_pairs: n must be >= 1");
  validate(source.pump);
  if (!(source.sigma_single_k > 0.0)) throw ConfigError("sigma_single must be > 0");

  const double sigma_sum = momentum_sigma(source.pump);
  const double lambda = 2.0 * source.pump.wavelength_um;  // degenerate SPDC
  const double k_max = 2.0 * M_PI / lambda;               // paraxial transverse cut
  // Gaussian beam intensity waist: per-axis position std = w_p / 2.
  const double sigma_r = source.pump.waist_um / 2.0;
  const double half_aperture = source.pump.crystal_aperture_um / 2.0;

  Rng rng(derive_seed(seed, 0x5bdc));

  // Conditional on the pair count, Poisson arrival times over the window are
  // sorted iid uniforms.
  std::vector<double> times(n);
  const double duration_ns = duration_s * 1.0e9;
  for (auto& t : times) t = rng.uniform(0.0, duration_ns);
  std::sort(times.begin(), times.end());

  std::vector<PhotonPairEvent> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    PhotonPairEvent& e = events[i];
    e.t_ns = times[i];
    e.lambda_um = lambda;

    do {
      e.r_um = {rng.normal(0.0, sigma_r), rng.normal(0.0, sigma_r)};
    } while (std::abs(e.r_um.x) > half_aperture || std::abs(e.r_um.y) > half_aperture);

    do {
      e.k_signal = {rng.normal(0.0, source.sigma_single_k),
                    rng.normal(0.0, source.sigma_single_k)};
    } while (e.k_signal.norm() >= k_max);

    do {
      e.k_idler = {-e.k_signal.x + rng.normal(0.0, sigma_sum),
                   -e.k_signal.y + rng.normal(0.0, sigma_sum)};
    } while (e.k_idler.norm() >= k_max);
  }
  return events;
}

}  // namespace qclfm
