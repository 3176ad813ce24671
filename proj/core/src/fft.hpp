#pragma once

#include <complex>

namespace qclfm::detail {

// In-place 2D DFT on a row-major h x w array. Forward uses the e^{-ikx}
// kernel unnormalized; inverse applies the 1/(w*h) factor. Thread-safe.
void fft2d(std::complex<double>* data, int width, int height, bool forward);

}  // namespace qclfm::detail
