#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace qclfm::detail {

namespace {

// FFTW planning is not thread-safe and introspects array alignment, so plans
// are created once per (shape, direction) against a scratch buffer and reused
// with fftw_execute_dft. FFTW_ESTIMATE keeps planning deterministic.
struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans;

  fftw_plan get(int width, int height, bool forward) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(width, height, forward);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(width) * height);
    fftw_plan plan = fftw_plan_dft_2d(height, width, scratch, scratch,
                                      forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft2d(std::complex<double>* data, int width, int height, bool forward) {
  fftw_plan plan = cache().get(width, height, forward);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
  if (!forward) {
    double scale = 1.0 / (static_cast<double>(width) * static_cast<double>(height));
    std::size_t n = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
  }
}

}  // namespace qclfm::detail
